//! Static word vectors, precomputed contextual vectors, and the vector
//! compositions built from them.

use std::collections::HashMap;

use serde::Deserialize;

use crate::corpus::Sentence;
use crate::{Error, Result, WithWarnings};

/// Immutable token → vector table. Lookups of unknown tokens return the zero
/// vector.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    lowercase: bool,
    zero: Vec<f64>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, lowercase: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::data("embedding dimension must be positive"));
        }
        Ok(Self {
            dim,
            table: HashMap::new(),
            lowercase,
            zero: vec![0.0; dim],
        })
    }

    /// Inserts a vector, returning `true` if it replaced an existing entry.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::data(format!(
                "vector for {token:?} has length {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        let key = self.key(token);
        Ok(self.table.insert(key, vector).is_some())
    }

    fn key(&self, token: &str) -> String {
        if self.lowercase {
            token.to_lowercase()
        } else {
            token.to_string()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.get(token).is_some()
    }

    fn get(&self, token: &str) -> Option<&Vec<f64>> {
        if self.lowercase {
            self.table.get(&token.to_lowercase())
        } else {
            self.table.get(token)
        }
    }

    /// Stored vector, or the zero vector for out-of-vocabulary tokens.
    pub fn lookup(&self, token: &str) -> &[f64] {
        self.get(token).map_or(&self.zero, Vec::as_slice)
    }
}

/// Reads the word2vec text format: a `V D` header followed by `V` lines of
/// `token x1 .. xD`. Duplicate tokens keep the last vector and emit a warning.
pub fn load_word_vectors(text: &str, lowercase: bool) -> Result<WithWarnings<EmbeddingStore>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty vector file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::parse(hline, "header must be \"<count> <dim>\""));
    }
    let count: usize = fields[0]
        .parse()
        .map_err(|_| Error::parse(hline, format!("invalid vector count {:?}", fields[0])))?;
    let dim: usize = fields[1]
        .parse()
        .map_err(|_| Error::parse(hline, format!("invalid dimension {:?}", fields[1])))?;
    if dim == 0 {
        return Err(Error::parse(hline, "dimension must be positive"));
    }

    let mut store = EmbeddingStore::new(dim, lowercase)?;
    let mut warnings = Vec::new();
    let mut read = 0;
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        read += 1;
        if read > count {
            return Err(Error::parse(
                lineno,
                format!("more vectors than the {count} declared in the header"),
            ));
        }
        let mut parts = line.split(' ').filter(|p| !p.is_empty());
        let token = parts.next().expect("non-blank line has a token");
        let values = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("invalid number {p:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(lineno, format!("non-finite value for {token:?}")));
        }
        if store.insert(token, values)? {
            warnings.push(format!(
                "line {lineno}: duplicate token {token:?}, keeping the last vector"
            ));
        }
    }
    if read != count {
        return Err(Error::parse(
            last_line,
            format!("header declares {count} vectors, found {read}"),
        ));
    }
    Ok(WithWarnings::new(store, warnings))
}

/// Vector of a (possibly phrasal) predicate: only its first word is looked up.
pub fn verb_vector(store: &EmbeddingStore, predicate_surfaces: &[&str]) -> Vec<f64> {
    match predicate_surfaces.first() {
        Some(first) => store.lookup(first).to_vec(),
        None => vec![0.0; store.dim()],
    }
}

/// Mean of the token vectors of a span; unknown tokens count as zero vectors.
pub fn span_vector(store: &EmbeddingStore, span_surfaces: &[&str]) -> Vec<f64> {
    let mut acc = vec![0.0; store.dim()];
    if span_surfaces.is_empty() {
        return acc;
    }
    for s in span_surfaces {
        axpy(&mut acc, 1.0, store.lookup(s));
    }
    let n = span_surfaces.len() as f64;
    acc.iter_mut().for_each(|x| *x /= n);
    acc
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (y, x) in acc.iter_mut().zip(x) {
        *y += a * x;
    }
}

/// Document frequencies over a corpus, one document per sentence.
#[derive(Debug, Clone)]
pub struct IdfTable {
    doc_count: usize,
    df: HashMap<String, usize>,
}

impl IdfTable {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn df(&self, token: &str) -> usize {
        self.df.get(token).copied().unwrap_or(0)
    }

    /// `ln(N / df)`; tokens never seen are treated as `df = 1`.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.df(token).max(1);
        (self.doc_count as f64 / df as f64).ln()
    }
}

pub fn compute_idf(corpus: &[Sentence]) -> Result<IdfTable> {
    if corpus.is_empty() {
        return Err(Error::data("cannot compute idf over an empty corpus"));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for s in corpus {
        let mut seen: Vec<&str> = s.tokens.iter().map(|t| t.surface.as_str()).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t.to_string()).or_default() += 1;
        }
    }
    Ok(IdfTable {
        doc_count: corpus.len(),
        df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Tfidf,
    Uniform,
}

/// Weighted mean of the sentence's token vectors. Under `Tfidf` each token
/// position carries `tf * idf`, so a surface occurring `tf` times contributes
/// `tf^2 * idf` in total. Falls back to the uniform mean when all weights are 0.
pub fn context_vector(
    sentence: &Sentence,
    store: &EmbeddingStore,
    idf: &IdfTable,
    weighting: Weighting,
) -> Vec<f64> {
    let surfaces: Vec<&str> = sentence.tokens.iter().map(|t| t.surface.as_str()).collect();
    let weights: Vec<f64> = match weighting {
        Weighting::Uniform => vec![1.0; surfaces.len()],
        Weighting::Tfidf => {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for s in &surfaces {
                *tf.entry(s).or_default() += 1;
            }
            surfaces
                .iter()
                .map(|s| tf[s] as f64 * idf.idf(s))
                .collect()
        }
    };
    let total: f64 = weights.iter().sum();
    let (weights, total) = if total > 0.0 {
        (weights, total)
    } else {
        (vec![1.0; surfaces.len()], surfaces.len() as f64)
    };
    let mut acc = vec![0.0; store.dim()];
    for (s, w) in surfaces.iter().zip(&weights) {
        axpy(&mut acc, *w, store.lookup(s));
    }
    acc.iter_mut().for_each(|x| *x /= total);
    acc
}

/// Extent of one named block inside a composed vector.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposedVector {
    pub values: Vec<f64>,
    pub blocks: Vec<Block>,
}

/// Concatenates parts in order. With `normalize`, the whole vector is scaled
/// to unit L2 norm (a zero vector stays zero).
pub fn compose(parts: &[(&str, &[f64])], normalize: bool) -> ComposedVector {
    let mut values = Vec::with_capacity(parts.iter().map(|(_, v)| v.len()).sum());
    let mut blocks = Vec::with_capacity(parts.len());
    for (name, v) in parts {
        blocks.push(Block {
            name: name.to_string(),
            offset: values.len(),
            len: v.len(),
        });
        values.extend_from_slice(v);
    }
    if normalize {
        l2_normalize(&mut values);
    }
    ComposedVector { values, blocks }
}

pub fn l2_normalize(values: &mut [f64]) {
    let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Precomputed vectors keyed by id. Sentence-level vectors use the sentence id;
/// token-level vectors use `sentence_id@token_index`.
#[derive(Debug, Clone)]
pub struct ContextualVectorFile {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl ContextualVectorFile {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    pub fn require(&self, id: &str) -> Result<&[f64]> {
        self.get(id)
            .ok_or_else(|| Error::data(format!("contextual vector missing for {id:?}")))
    }

    pub fn token_key(sentence_id: &str, token_index: usize) -> String {
        format!("{sentence_id}@{token_index}")
    }
}

#[derive(Deserialize)]
struct VectorRecord {
    id: String,
    vector: Vec<f64>,
}

/// Reads `{"id": ..., "vector": [...]}` lines.
pub fn load_contextual_vectors(text: &str) -> Result<ContextualVectorFile> {
    let mut entries = HashMap::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: VectorRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        let d = *dim.get_or_insert(rec.vector.len());
        if d == 0 {
            return Err(Error::parse(lineno, "empty vector"));
        }
        if rec.vector.len() != d {
            return Err(Error::parse(
                lineno,
                format!("dimension mismatch: expected {d}, found {}", rec.vector.len()),
            ));
        }
        if entries.contains_key(&rec.id) {
            return Err(Error::parse(lineno, format!("duplicate id {:?}", rec.id)));
        }
        entries.insert(rec.id, rec.vector);
    }
    let dim = dim.ok_or_else(|| Error::data("contextual vector file is empty"))?;
    Ok(ContextualVectorFile { dim, entries })
}
