//! Syntactic and positional feature blocks for slot instances, and the
//! assembly of named blocks into a feature matrix.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::{InstanceId, Sentence, SlotSpan};
use crate::embeddings::{l2_normalize, Block};
use crate::{Error, Result};

/// Sorted dependency-label vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepLabelIndex {
    labels: Vec<String>,
    position: HashMap<String, usize>,
}

impl DepLabelIndex {
    /// Builds the vocabulary over every token of every sentence given.
    pub fn build<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Self {
        let labels: BTreeSet<&str> = sentences
            .into_iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.deprel.as_str()))
            .collect();
        Self::from_labels(labels.into_iter().map(str::to_string))
    }

    /// Builds from an explicit label list; duplicates are dropped and the
    /// result is sorted.
    pub fn from_labels(labels: impl IntoIterator<Item = String>) -> Self {
        let labels: Vec<String> = labels
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let position = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self { labels, position }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.position.get(label).copied().ok_or_else(|| {
            Error::data(format!(
                "dependency label {label:?} is not in the label index"
            ))
        })
    }
}

/// -1 at the label of every arc entering a slot token, 0 elsewhere.
pub fn inbound_dependency_vector(
    sentence: &Sentence,
    slot: &SlotSpan,
    index: &DepLabelIndex,
) -> Result<Vec<f64>> {
    let mut v = vec![0.0; index.len()];
    for &i in &slot.token_indices {
        v[index.position(&sentence.token(i).deprel)?] = -1.0;
    }
    Ok(v)
}

/// +1 at the label of every arc leaving the slot toward a token outside it.
pub fn outbound_dependency_vector(
    sentence: &Sentence,
    slot: &SlotSpan,
    index: &DepLabelIndex,
) -> Result<Vec<f64>> {
    let mut v = vec![0.0; index.len()];
    for t in &sentence.tokens {
        if slot.token_indices.contains(&t.index) {
            continue;
        }
        if t.head != 0 && slot.token_indices.contains(&t.head) {
            v[index.position(&t.deprel)?] = 1.0;
        }
    }
    Ok(v)
}

/// Inbound (-1) and outbound (+1) arcs in one vector; inbound wins where a
/// label occurs in both directions.
pub fn in_out_dependency_vector(
    sentence: &Sentence,
    slot: &SlotSpan,
    index: &DepLabelIndex,
) -> Result<Vec<f64>> {
    let inbound = inbound_dependency_vector(sentence, slot, index)?;
    let outbound = outbound_dependency_vector(sentence, slot, index)?;
    Ok(inbound
        .into_iter()
        .zip(outbound)
        .map(|(i, o)| if i < 0.0 { i } else { o })
        .collect())
}

/// 0 if the verb strictly precedes the token, 1 otherwise.
pub fn boolean_feature(verb_position: usize, token_position: usize) -> u8 {
    if verb_position < token_position {
        0
    } else {
        1
    }
}

/// Boolean feature of a slot, using the first predicate token and the first
/// slot token as positions.
pub fn slot_boolean_feature(sentence: &Sentence, slot: &SlotSpan) -> u8 {
    boolean_feature(sentence.predicate.token_indices[0], slot.token_indices[0])
}

/// The 1-based ordinal of a slot within its sentence.
pub fn index_feature(slot_ordinal: usize) -> usize {
    slot_ordinal
}

/// Per-instance vectors with one shared block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub instance_ids: Vec<InstanceId>,
    pub layout: Vec<Block>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn dim(&self) -> usize {
        self.layout.iter().map(|b| b.len).sum()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Computes one block of an instance's vector.
pub type SourceFn<'a> = Box<dyn Fn(&InstanceId) -> Result<Vec<f64>> + Sync + 'a>;

/// A named per-instance vector source.
pub struct BlockSource<'a> {
    pub name: String,
    pub source: SourceFn<'a>,
}

impl<'a> BlockSource<'a> {
    pub fn new(
        name: impl Into<String>,
        source: impl Fn(&InstanceId) -> Result<Vec<f64>> + Sync + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            source: Box::new(source),
        }
    }
}

/// Concatenates every block for every instance. The first instance fixes each
/// block's length; a later instance producing a different length is an error.
pub fn assemble(
    blocks: &[BlockSource<'_>],
    instances: &[InstanceId],
    normalize: bool,
) -> Result<FeatureMatrix> {
    if blocks.is_empty() {
        return Err(Error::config("feature recipe has no blocks"));
    }
    let build_row = |id: &InstanceId| -> Result<Vec<Vec<f64>>> {
        blocks.iter().map(|b| (b.source)(id)).collect()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<Vec<f64>>> = {
        use rayon::prelude::*;
        instances.par_iter().map(build_row).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<Vec<f64>>> = instances.iter().map(build_row).collect::<Result<_>>()?;

    let mut layout = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    for (b, block) in blocks.iter().enumerate() {
        let len = parts.first().map_or(0, |p| p[b].len());
        layout.push(Block {
            name: block.name.clone(),
            offset,
            len,
        });
        offset += len;
    }

    let mut rows = Vec::with_capacity(parts.len());
    for (id, row_parts) in instances.iter().zip(parts) {
        let mut row = Vec::with_capacity(offset);
        for (block, part) in layout.iter().zip(row_parts) {
            if part.len() != block.len {
                return Err(Error::data(format!(
                    "block {:?} yields length {} for instance {id}, expected {}",
                    block.name,
                    part.len(),
                    block.len
                )));
            }
            if part.iter().any(|x| !x.is_finite()) {
                return Err(Error::data(format!(
                    "block {:?} yields a non-finite value for instance {id}",
                    block.name
                )));
            }
            row.extend(part);
        }
        if normalize {
            l2_normalize(&mut row);
        }
        rows.push(row);
    }
    Ok(FeatureMatrix {
        instance_ids: instances.to_vec(),
        layout,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PredicateSpan, Token};
    use proptest::prelude::*;

    fn parse(rows: &[(&str, usize, &str)], predicate: usize, slots: &[&[usize]]) -> Sentence {
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, (w, h, d))| Token {
                index: i + 1,
                surface: w.to_string(),
                lemma: w.to_string(),
                upos: "X".into(),
                head: *h,
                deprel: d.to_string(),
            })
            .collect();
        let slots = slots
            .iter()
            .enumerate()
            .map(|(i, s)| SlotSpan {
                slot_id: format!("{}", i + 1),
                token_indices: s.to_vec(),
                gold_role: None,
            })
            .collect();
        Sentence::new(
            "s".into(),
            tokens,
            PredicateSpan {
                token_indices: vec![predicate],
                gold_frame: None,
            },
            slots,
        )
        .unwrap()
        .value
    }

    fn idx(labels: &[&str]) -> DepLabelIndex {
        DepLabelIndex::from_labels(labels.iter().map(|s| s.to_string()))
    }

    // The old man bought a car
    fn sample() -> Sentence {
        parse(
            &[
                ("The", 3, "det"),
                ("old", 3, "amod"),
                ("man", 4, "nsubj"),
                ("bought", 0, "root"),
                ("a", 6, "det"),
                ("car", 4, "dobj"),
            ],
            4,
            &[&[3], &[6]],
        )
    }

    fn sample_old_man() -> Sentence {
        let mut s = sample();
        s.slots[0].token_indices = vec![2, 3];
        s
    }

    #[test]
    fn label_index_is_sorted() {
        let s = sample();
        let index = DepLabelIndex::build([&s]);
        assert_eq!(index.labels(), ["amod", "det", "dobj", "nsubj", "root"]);
        assert_eq!(index.position("dobj").unwrap(), 2);
        assert!(index.position("nmod").is_err());
    }

    #[test]
    fn inbound_single_token() {
        let s = parse(&[("John", 2, "nsubj"), ("ran", 0, "root")], 2, &[&[1]]);
        let v = inbound_dependency_vector(&s, &s.slots[0], &idx(&["dobj", "nmod", "nsubj"])).unwrap();
        assert_eq!(v, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn inbound_multi_word() {
        let s = parse(
            &[("John", 3, "nsubj"), ("of", 1, "nmod"), ("ran", 0, "root")],
            3,
            &[&[1, 2]],
        );
        let v = inbound_dependency_vector(&s, &s.slots[0], &idx(&["dobj", "nmod", "nsubj"])).unwrap();
        assert_eq!(v, vec![0.0, -1.0, -1.0]);
    }

    #[test]
    fn inbound_saturated() {
        let s = parse(
            &[("a", 3, "nsubj"), ("b", 1, "nmod"), ("c", 0, "root")],
            3,
            &[&[1, 2]],
        );
        let v = inbound_dependency_vector(&s, &s.slots[0], &idx(&["nmod", "nsubj"])).unwrap();
        assert_eq!(v, vec![-1.0, -1.0]);
    }

    #[test]
    fn inbound_unknown_label_errors() {
        let s = sample();
        assert!(inbound_dependency_vector(&s, &s.slots[0], &idx(&["det"])).is_err());
    }

    #[test]
    fn outbound_and_combined() {
        let s = sample();
        let index = DepLabelIndex::build([&s]);
        // slot "man" governs "The"(det) and "old"(amod)
        let out = outbound_dependency_vector(&s, &s.slots[0], &index).unwrap();
        assert_eq!(out, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        // "old man": "old" is inside the span, so only det points outward
        let wide = sample_old_man();
        let out = outbound_dependency_vector(&wide, &wide.slots[0], &index).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        // "car" governs "a"
        let out = outbound_dependency_vector(&s, &s.slots[1], &index).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn outbound_without_dependents_is_zero() {
        let s = parse(&[("John", 2, "nsubj"), ("ran", 0, "root")], 2, &[&[1]]);
        let index = DepLabelIndex::build([&s]);
        let v = outbound_dependency_vector(&s, &s.slots[0], &index).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn inbound_takes_precedence() {
        // "man" (nmod) governs "friend" (nmod): same label in and out
        let s = parse(
            &[("ran", 0, "root"), ("man", 1, "nmod"), ("friend", 2, "nmod")],
            1,
            &[&[2]],
        );
        let index = DepLabelIndex::build([&s]);
        let v = in_out_dependency_vector(&s, &s.slots[0], &index).unwrap();
        assert_eq!(v[index.position("nmod").unwrap()], -1.0);
    }

    #[test]
    fn boolean_rule() {
        assert_eq!(boolean_feature(2, 5), 0);
        assert_eq!(boolean_feature(5, 2), 1);
        assert_eq!(boolean_feature(3, 3), 1);
        let s = sample();
        assert_eq!(slot_boolean_feature(&s, &s.slots[0]), 1);
        assert_eq!(slot_boolean_feature(&s, &s.slots[1]), 0);
    }

    #[test]
    fn index_rule() {
        assert_eq!(index_feature(1), 1);
        assert_eq!(index_feature(5), 5);
    }

    fn constant(name: &str, v: Vec<f64>) -> BlockSource<'static> {
        BlockSource::new(name, move |_| Ok(v.clone()))
    }

    #[test]
    fn assemble_layout() {
        let ids: Vec<InstanceId> = (0..4).map(|i| InstanceId::verb(&format!("s{i}"))).collect();
        let blocks = [
            constant("c", vec![1.0, 2.0]),
            constant("ID", vec![0.0, -1.0, 0.0]),
            constant("B", vec![1.0]),
            constant("123", vec![2.0]),
        ];
        let m = assemble(&blocks, &ids, false).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m.dim(), 7);
        assert!(m.rows.iter().all(|r| r.len() == 7));
        assert_eq!(m.layout[1], Block { name: "ID".into(), offset: 2, len: 3 });

        let single = assemble(&[constant("c", vec![3.0, 4.0])], &ids, false).unwrap();
        assert_eq!(single.rows[0], vec![3.0, 4.0]);
        let normed = assemble(&[constant("c", vec![3.0, 4.0])], &ids, true).unwrap();
        assert_eq!(normed.rows[0], vec![0.6, 0.8]);
    }

    #[test]
    fn assemble_detects_drift() {
        let ids = vec![InstanceId::verb("a"), InstanceId::verb("b")];
        let drift = BlockSource::new("w", |id: &InstanceId| {
            Ok(if id.sentence_id == "a" { vec![0.0; 2] } else { vec![0.0; 3] })
        });
        let err = assemble(&[drift], &ids, false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"w\"") && msg.contains("b"), "{msg}");
    }

    proptest! {
        #[test]
        fn boolean_antisymmetric(a in 1usize..50, b in 1usize..50) {
            prop_assume!(a != b);
            prop_assert_eq!(boolean_feature(a, b) + boolean_feature(b, a), 1);
        }

        #[test]
        fn assemble_dim_is_sum(lens in prop::collection::vec(0usize..5, 1..5), n in 1usize..6) {
            let ids: Vec<InstanceId> = (0..n).map(|i| InstanceId::verb(&format!("s{i}"))).collect();
            let blocks: Vec<_> = lens.iter().enumerate()
                .map(|(i, &l)| constant(&format!("b{i}"), vec![1.0; l]))
                .collect();
            let m = assemble(&blocks, &ids, false).unwrap();
            prop_assert_eq!(m.dim(), lens.iter().sum::<usize>());
            prop_assert!(m.rows.iter().all(|r| r.len() == m.dim()));
        }
    }
}
