use std::collections::BTreeMap;

use super::{Result, StatsError};

/// Column-oriented table of categorical and numeric columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frame {
    len: usize,
    categorical: BTreeMap<String, Vec<String>>,
    numeric: BTreeMap<String, Vec<f64>>,
}

impl Frame {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn with_categorical(mut self, name: &str, values: Vec<String>) -> Result<Self> {
        self.check_len(name, values.len())?;
        self.numeric.remove(name);
        self.categorical.insert(name.to_string(), values);
        Ok(self)
    }

    pub fn with_numeric(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.check_len(name, values.len())?;
        self.categorical.remove(name);
        self.numeric.insert(name.to_string(), values);
        Ok(self)
    }

    fn check_len(&self, name: &str, len: usize) -> Result<()> {
        if len != self.len {
            return Err(StatsError::InvalidSpec(format!(
                "column '{name}' has {len} values, frame has {}",
                self.len
            )));
        }
        Ok(())
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        self.categorical
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| StatsError::UnknownColumn(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.numeric
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| StatsError::UnknownColumn(name.to_string()))
    }

    /// Sorted distinct levels of a categorical column.
    pub fn levels(&self, name: &str) -> Result<Vec<String>> {
        let mut v: Vec<String> = self.categorical(name)?.to_vec();
        v.sort();
        v.dedup();
        Ok(v)
    }

    pub fn numeric_names(&self) -> impl Iterator<Item = &str> {
        self.numeric.keys().map(String::as_str)
    }
}
