use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Max and root-mean-square of one equation's residual over a sample set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualStat {
    pub max: f64,
    pub l2: f64,
    pub count: usize,
}

/// Residual statistics keyed by equation tag.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: BTreeMap<String, ResidualStat>,
    /// Grid norms such as the spacing used, keyed by name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub norms: BTreeMap<String, f64>,
}

impl ResidualReport {
    /// Builds the report from per-tag residual samples, summing in the given
    /// order so the result does not depend on how samples were produced.
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for (tag, r) in samples {
            let e = acc.entry(tag.to_string()).or_default();
            e.0 = e.0.max(r.abs());
            e.1 += r * r;
            e.2 += 1;
        }
        let entries = acc
            .into_iter()
            .map(|(tag, (max, sq, count))| {
                let l2 = if count == 0 {
                    0.0
                } else {
                    (sq / count as f64).sqrt()
                };
                (tag, ResidualStat { max, l2, count })
            })
            .collect();
        ResidualReport {
            entries,
            norms: BTreeMap::new(),
        }
    }

    pub fn get(&self, tag: &str) -> Option<&ResidualStat> {
        self.entries.get(tag)
    }

    pub fn max_over<'a>(&self, tags: impl IntoIterator<Item = &'a str>) -> f64 {
        tags.into_iter()
            .filter_map(|t| self.entries.get(t))
            .map(|s| s.max)
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.entries.values().map(|s| s.max).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
