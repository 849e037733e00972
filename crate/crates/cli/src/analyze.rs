use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use ispear::dsp::{features_to_frame, read_features_csv, FEATURE_COLUMNS};
use ispear::format::{sig, sig9};
use ispear::stats::{fit_lmm, fit_ols, group_summary, lrt, lrt_with, LmmFit, LrtOptions, ModelSpec};

use crate::{runtime, write_file, CliError};

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Feature CSV written by `extract`.
    #[arg(long)]
    features: PathBuf,
    /// Directory for analysis.txt and analysis.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Grouping factor of the random intercept.
    #[arg(long, default_value = "gender", value_parser = ["gender", "subject_id", "word"])]
    random_group: String,
    /// Reference emotion for treatment contrasts.
    #[arg(long, default_value = "happy", value_parser = ["happy", "neutral", "sad"])]
    reference: String,
    /// Use the 50:50 chi-square(0)/chi-square(1) mixture when testing the random intercept.
    #[arg(long)]
    boundary_correction: bool,
    /// Significance level used to flag rows in the text report.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

struct Row {
    response: &'static str,
    full: LmmFit,
    tests: [(String, f64, f64, f64); 2],
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
    }
    let rows = read_features_csv(&args.features).map_err(runtime)?;
    let frame = features_to_frame(&rows).map_err(runtime)?;
    let opts = LrtOptions {
        boundary_correction: args.boundary_correction,
    };
    let group = args.random_group.as_str();
    let mut results = Vec::new();
    for response in FEATURE_COLUMNS {
        let spec = ModelSpec::new(response)
            .fixed("emotion", Some(&args.reference))
            .random(group);
        let ctx = |e: ispear::stats::StatsError| runtime(format!("{response}: {e}"));
        let full = fit_lmm(&spec, &frame).map_err(ctx)?;
        let no_fixed = fit_lmm(&spec.without_fixed(), &frame).map_err(ctx)?;
        let no_random = fit_ols(&spec.without_random(), &frame).map_err(ctx)?;
        let a = lrt(&full, &no_fixed).map_err(ctx)?;
        let b = lrt_with(&full, &no_random, &opts).map_err(ctx)?;
        results.push(Row {
            response,
            full,
            tests: [
                ("emotion".to_string(), a.statistic, a.df, a.p_value),
                (group.to_string(), b.statistic, b.df, b.p_value),
            ],
        });
    }

    let mut csv = String::from("response,comparison,statistic,df,p_value\n");
    for r in &results {
        for (cmp, stat, df, p) in &r.tests {
            writeln!(csv, "{},{cmp},{},{df},{}", r.response, sig9(*stat), sig9(*p)).unwrap();
        }
    }

    let mut txt = String::new();
    writeln!(
        txt,
        "Full model: <response> ~ emotion + (1 | {group}), maximum likelihood, emotion reference '{}'",
        args.reference
    )
    .unwrap();
    writeln!(txt, "Observations: {}", frame.len()).unwrap();
    writeln!(txt).unwrap();
    writeln!(txt, "Full vs. null model comparison (likelihood-ratio test)").unwrap();
    writeln!(txt, "{:<18} {:<14} {:>12} {:>3} {:>12}", "Response", "Dropped term", "Chisq", "Df", "p-value").unwrap();
    for r in &results {
        for (cmp, stat, df, p) in &r.tests {
            let kind = if cmp == "emotion" { "fixed" } else { "random" };
            let flag = if *p < args.alpha { " *" } else { "" };
            writeln!(
                txt,
                "{:<18} {:<14} {:>12} {:>3} {:>12}{flag}",
                r.response,
                format!("{cmp} ({kind})"),
                sig(*stat, 5),
                df,
                sig(*p, 4)
            )
            .unwrap();
        }
    }
    writeln!(txt, "* p < {}", args.alpha).unwrap();
    writeln!(txt).unwrap();
    writeln!(txt, "Fixed effects of the full models (estimate +- SE) and variance components").unwrap();
    for r in &results {
        let terms: Vec<String> = r
            .full
            .coef_names
            .iter()
            .zip(r.full.beta.iter().zip(&r.full.std_errors))
            .map(|(n, (b, se))| format!("{n} {} +- {}", sig(*b, 6), sig(*se, 4)))
            .collect();
        writeln!(
            txt,
            "{:<18} {}; sigma_{group} {}, sigma_e {}",
            r.response,
            terms.join("; "),
            sig(r.full.sigma_b, 5),
            sig(r.full.sigma_e, 5)
        )
        .unwrap();
    }
    writeln!(txt).unwrap();
    writeln!(txt, "Duration by gender (seconds)").unwrap();
    writeln!(txt, "{:<8} {:>6} {:>10} {:>10} {:>10}", "gender", "n", "mean", "sd", "se").unwrap();
    for g in group_summary(&frame, "gender", "duration_s").map_err(runtime)? {
        writeln!(
            txt,
            "{:<8} {:>6} {:>10} {:>10} {:>10}",
            g.label,
            g.n,
            sig(g.mean, 4),
            sig(g.sd, 4),
            sig(g.se, 3)
        )
        .unwrap();
    }

    write_file(&args.out_dir.join("analysis.csv"), &csv)?;
    write_file(&args.out_dir.join("analysis.txt"), &txt)?;
    let flagged: Vec<&str> = results
        .iter()
        .filter(|r| r.tests[0].3 < args.alpha)
        .map(|r| r.response)
        .collect();
    eprintln!(
        "emotion effect significant for: {}",
        if flagged.is_empty() { "none".to_string() } else { flagged.join(", ") }
    );
    Ok(())
}
