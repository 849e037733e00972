use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ispear::dsp::{read_features_csv, FeatureRow};
use ispear::format::sig9;
use ispear::ml::{
    evaluate_cv, Class, ClassWeighting, ClassifierConfig, EvalReport, LabeledSet, PolyKernel,
    SigmoidConfig, SvmConfig,
};

use crate::{runtime, write_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Svm,
    Sigmoid,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Weighting {
    None,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Input {
    AmplitudeMean,
    DurationSamples,
    DurationS,
    Db1,
    Db2,
    Db3,
    Db4,
}

impl Input {
    fn value(self, r: &FeatureRow) -> f64 {
        match self {
            Input::AmplitudeMean => r.amplitude_mean,
            Input::DurationSamples => r.duration_samples as f64,
            Input::DurationS => r.duration_s,
            Input::Db1 => r.approx_means[0],
            Input::Db2 => r.approx_means[1],
            Input::Db3 => r.approx_means[2],
            Input::Db4 => r.approx_means[3],
        }
    }

    fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Feature CSV written by `extract`.
    #[arg(long)]
    features: PathBuf,
    /// Directory for evaluation.txt and evaluation_<model>.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Classifier(s) to evaluate.
    #[arg(long, value_enum, default_value_t = Model::Both)]
    model: Model,
    /// Classifier input column; repeat for several.
    #[arg(long = "input", value_enum, default_values_t = [Input::DurationSamples])]
    inputs: Vec<Input>,
    /// Number of stratified folds.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(2..))]
    folds: u32,
    /// Root seed for fold assignment and per-fold training.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Polynomial kernel degree.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    degree: u32,
    /// Polynomial kernel offset.
    #[arg(long, default_value_t = 1.0)]
    coef0: f64,
    /// Kernel scale [default: 1 / number of inputs].
    #[arg(long)]
    gamma: Option<f64>,
    /// SVM box constraint.
    #[arg(long = "c", default_value_t = 1.0)]
    c: f64,
    /// SMO stopping tolerance on the KKT violation.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// SMO iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Sigmoid neuron learning rate.
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f64,
    /// Sigmoid neuron full-batch epochs.
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    /// Per-class loss weighting for both models.
    #[arg(long, value_enum, default_value_t = Weighting::None)]
    class_weight: Weighting,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.1}%", 100.0 * x))
}

fn weight_name(w: ClassWeighting) -> &'static str {
    match w {
        ClassWeighting::None => "none",
        ClassWeighting::Balanced => "balanced",
    }
}

fn describe(cfg: &ClassifierConfig) -> String {
    match cfg {
        ClassifierConfig::Svm(s) => {
            let gamma = s.kernel.gamma.map_or("1/d".to_string(), |g| g.to_string());
            format!(
                "SVM, polynomial kernel (degree {}, coef0 {}, gamma {gamma}), C {}, tol {}, weighting {}",
                s.kernel.degree, s.kernel.coef0, s.c, s.tol, weight_name(s.weighting)
            )
        }
        ClassifierConfig::Sigmoid(s) => format!(
            "NN, single sigmoid neuron (learning rate {}, {} epochs, weighting {})",
            s.learning_rate, s.epochs, weight_name(s.weighting)
        ),
        ClassifierConfig::Constant { class } => format!("constant ({class})"),
    }
}

fn table(r: &EvalReport, txt: &mut String) {
    let m = &r.metrics;
    let [ne, em] = m.per_class;
    writeln!(txt, "{}", describe(&r.classifier)).unwrap();
    writeln!(txt, "{:<26} {:>14} {:>14}", "actual \\ predicted", "non-emotional", "emotional").unwrap();
    for c in Class::ALL {
        let row = r.pooled.counts[c.index()];
        writeln!(txt, "{:<26} {:>14} {:>14}", c.as_str(), row[0], row[1]).unwrap();
    }
    writeln!(txt, "{:<26} {:>14} {:>14}", "Precision", pct(ne.precision), pct(em.precision)).unwrap();
    writeln!(txt, "{:<26} {:>14} {:>14}", "Recall", pct(ne.recall), pct(em.recall)).unwrap();
    writeln!(txt, "{:<26} {:>14}", "Accuracy", pct(Some(m.accuracy))).unwrap();
    writeln!(txt, "{:<26} {:>14}", "Accuracy (mean of folds)", pct(Some(r.mean_fold_accuracy))).unwrap();
    writeln!(txt, "{:<26} {:>14} {:>14}", "Precision (standard)", pct(ne.std_precision), pct(em.std_precision)).unwrap();
    writeln!(txt, "{:<26} {:>14} {:>14}", "Recall (standard)", pct(ne.std_recall), pct(em.std_recall)).unwrap();
    let stalled: Vec<String> = r.folds.iter().filter(|f| !f.converged).map(|f| f.fold.to_string()).collect();
    if !stalled.is_empty() {
        writeln!(txt, "SMO hit the iteration cap in fold(s) {}", stalled.join(", ")).unwrap();
    }
    writeln!(txt).unwrap();
}

fn csv(r: &EvalReport) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), sig9);
    let mut out = String::from("class,tp_row,fp_row,precision,recall\n");
    for c in &r.metrics.per_class {
        writeln!(out, "{},{},{},{},{}", c.class, c.tp_row, c.fp_row, fmt(c.precision), fmt(c.recall)).unwrap();
    }
    writeln!(out, "accuracy,{}", sig9(r.metrics.accuracy)).unwrap();
    out
}

pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    let weighting = match args.class_weight {
        Weighting::None => ClassWeighting::None,
        Weighting::Balanced => ClassWeighting::Balanced,
    };
    let svm = SvmConfig {
        kernel: PolyKernel {
            degree: args.degree,
            coef0: args.coef0,
            gamma: args.gamma,
        },
        c: args.c,
        tol: args.tol,
        max_iter: args.max_iter,
        weighting,
    };
    svm.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let sigmoid = SigmoidConfig {
        learning_rate: args.learning_rate,
        epochs: args.epochs,
        weighting,
        ..SigmoidConfig::default()
    };
    if !(sigmoid.learning_rate > 0.0 && sigmoid.learning_rate.is_finite()) {
        return Err(CliError::Usage("--learning-rate must be positive".into()));
    }
    let mut inputs = args.inputs.clone();
    inputs.dedup();

    let rows = read_features_csv(&args.features).map_err(runtime)?;
    let data = LabeledSet::new(
        rows.iter().map(|r| inputs.iter().map(|i| i.value(r)).collect()).collect(),
        rows.iter().map(|r| Class::from(r.emotion)).collect(),
    )
    .map_err(runtime)?;
    let models: Vec<(&str, ClassifierConfig)> = match args.model {
        Model::Svm => vec![("svm", ClassifierConfig::Svm(svm))],
        Model::Sigmoid => vec![("nn", ClassifierConfig::Sigmoid(sigmoid))],
        Model::Both => vec![
            ("svm", ClassifierConfig::Svm(svm)),
            ("nn", ClassifierConfig::Sigmoid(sigmoid)),
        ],
    };

    let [neg, pos] = data.class_counts();
    let mut txt = String::new();
    let names: Vec<String> = inputs.iter().map(|i| i.name()).collect();
    writeln!(txt, "Inputs: {} (z-scored with training-fold statistics)", names.join(", ")).unwrap();
    writeln!(txt, "Classes: {neg} non-emotional (neutral), {pos} emotional (happy, sad)").unwrap();
    writeln!(txt, "Stratified {}-fold cross-validation, seed {}", args.folds, args.seed).unwrap();
    writeln!(txt, "Precision = correct / actual-class total, Recall = correct / predicted-class total;").unwrap();
    writeln!(txt, "the (standard) rows use the usual definitions. '-' marks an undefined ratio.").unwrap();
    writeln!(txt).unwrap();
    for (tag, cfg) in &models {
        let report = evaluate_cv(&data, cfg, args.folds as usize, args.seed)
            .map_err(|e| runtime(format!("{}: {e}", cfg.name())))?;
        table(&report, &mut txt);
        write_file(&args.out_dir.join(format!("evaluation_{tag}.csv")), &csv(&report))?;
        eprintln!("{}: pooled accuracy {}", cfg.name(), pct(Some(report.pooled_accuracy)));
    }
    write_file(&args.out_dir.join("evaluation.txt"), &txt)
}
