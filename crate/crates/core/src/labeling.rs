//! Instance → label maps and their TSV form (`instance_id<TAB>label`, sorted
//! by instance id).

use std::collections::BTreeMap;

use crate::corpus::InstanceId;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labeling {
    entries: BTreeMap<String, String>,
}

/// Gold labelings share the representation of predictions.
pub type GoldLabeling = Labeling;

impl Labeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            entries: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn insert(&mut self, id: &InstanceId, label: impl Into<String>) {
        self.entries.insert(id.to_string(), label.into());
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.entries.get(id).map(String::as_str)
    }

    pub fn label(&self, id: &InstanceId) -> Option<&str> {
        self.get(&id.to_string())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Labels aligned with `ids`; every id must be present.
    pub fn aligned(&self, ids: &[InstanceId]) -> Result<Vec<&str>> {
        ids.iter()
            .map(|id| {
                self.label(id)
                    .ok_or_else(|| Error::data(format!("no label for instance {id}")))
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, label) in &self.entries {
            out.push_str(id);
            out.push('\t');
            out.push_str(label);
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            let (id, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected instance_id<TAB>label"))?;
            if id.is_empty() || label.is_empty() || label.contains('\t') {
                return Err(Error::parse(lineno, "empty instance id or malformed label"));
            }
            if entries.insert(id.to_string(), label.to_string()).is_some() {
                return Err(Error::parse(lineno, format!("duplicate instance id {id:?}")));
            }
        }
        Ok(Self { entries })
    }
}
