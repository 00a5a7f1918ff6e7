//! Dependency-annotated sentences with a highlighted predicate and argument
//! slots, plus the two input formats: CoNLL-U (parse only) and the task JSONL
//! format (parse + highlights).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result, WithWarnings};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSpan {
    pub token_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_frame: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpan {
    pub slot_id: String,
    pub token_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_role: Option<String>,
}

/// A validated sentence. Construct through [`Sentence::new`], [`parse_task_jsonl`]
/// or [`attach_annotations`]; every span index is guaranteed to resolve to a token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub predicate: PredicateSpan,
    pub slots: Vec<SlotSpan>,
}

/// Output of CoNLL-U parsing: a dependency tree without highlights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Validates and builds a sentence. Non-fatal findings (multiple roots,
    /// slots overlapping the predicate) are returned as warnings.
    pub fn new(
        id: String,
        tokens: Vec<Token>,
        predicate: PredicateSpan,
        slots: Vec<SlotSpan>,
    ) -> Result<WithWarnings<Sentence>> {
        let sentence = Sentence {
            id,
            tokens,
            predicate,
            slots,
        };
        let warnings = sentence.validate()?;
        Ok(WithWarnings::new(sentence, warnings))
    }

    fn validate(&self) -> Result<Vec<String>> {
        let id = self.id.as_str();
        let mut warnings = validate_tree(id, &self.tokens)?;
        let n = self.tokens.len();

        check_span(id, "predicate", &self.predicate.token_indices, n)?;
        if let Some(frame) = &self.predicate.gold_frame {
            check_label(id, "gold_frame", frame)?;
        }

        let mut seen_ids = HashSet::new();
        let mut owner: BTreeMap<usize, &str> = BTreeMap::new();
        for slot in &self.slots {
            if slot.slot_id.is_empty() || slot.slot_id.contains(['\t', '\n', '\r']) {
                return Err(Error::invalid(
                    id,
                    format!("invalid slot id {:?}", slot.slot_id),
                ));
            }
            if !seen_ids.insert(slot.slot_id.as_str()) {
                return Err(Error::invalid(
                    id,
                    format!("duplicate slot id {:?}", slot.slot_id),
                ));
            }
            check_span(id, &format!("slot {}", slot.slot_id), &slot.token_indices, n)?;
            if let Some(role) = &slot.gold_role {
                check_label(id, "gold_role", role)?;
            }
            for &i in &slot.token_indices {
                if let Some(other) = owner.insert(i, &slot.slot_id) {
                    return Err(Error::invalid(
                        id,
                        format!(
                            "overlapping slots {:?} and {:?} at token {i}",
                            other, slot.slot_id
                        ),
                    ));
                }
            }
            if slot
                .token_indices
                .iter()
                .any(|i| self.predicate.token_indices.contains(i))
            {
                warnings.push(format!(
                    "sentence {id}: slot {:?} overlaps the predicate",
                    slot.slot_id
                ));
            }
        }
        Ok(warnings)
    }

    /// The token at a 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    pub fn surfaces<'a>(&'a self, indices: &'a [usize]) -> impl Iterator<Item = &'a str> + 'a {
        indices.iter().map(|&i| self.token(i).surface.as_str())
    }

    pub fn predicate_surfaces(&self) -> Vec<&str> {
        self.surfaces(&self.predicate.token_indices).collect()
    }

    pub fn verb_instance(&self) -> InstanceId {
        InstanceId::verb(&self.id)
    }

    pub fn slot_instance(&self, slot: &SlotSpan) -> InstanceId {
        InstanceId::slot(&self.id, &slot.slot_id)
    }
}

fn check_label(sentence: &str, field: &str, label: &str) -> Result<()> {
    if label.is_empty() || label.contains(['\t', '\n', '\r']) {
        return Err(Error::invalid(
            sentence,
            format!("{field} must be non-empty and free of tabs/newlines"),
        ));
    }
    Ok(())
}

fn check_span(sentence: &str, what: &str, indices: &[usize], n: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::invalid(sentence, format!("{what} has no tokens")));
    }
    for &i in indices {
        if i == 0 || i > n {
            return Err(Error::invalid(
                sentence,
                format!("{what}: index out of range: {i} (sentence has {n} tokens)"),
            ));
        }
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            sentence,
            format!("{what}: token indices must be strictly increasing"),
        ));
    }
    Ok(())
}

/// Checks the token-level invariants shared by both input formats.
fn validate_tree(id: &str, tokens: &[Token]) -> Result<Vec<String>> {
    if id.is_empty() || id.contains(['#', '@', '\t', '\n', '\r']) {
        return Err(Error::invalid(
            id,
            "sentence id must be non-empty and must not contain '#', '@', tabs or newlines",
        ));
    }
    if tokens.is_empty() {
        return Err(Error::invalid(id, "sentence has no tokens"));
    }
    let n = tokens.len();
    let mut roots = 0;
    for (pos, t) in tokens.iter().enumerate() {
        if t.index != pos + 1 {
            return Err(Error::invalid(
                id,
                format!("token indices not contiguous: expected {}, found {}", pos + 1, t.index),
            ));
        }
        if t.head > n {
            return Err(Error::invalid(
                id,
                format!("token {}: head index out of range: {}", t.index, t.head),
            ));
        }
        if t.head == t.index {
            return Err(Error::invalid(id, format!("token {} is its own head", t.index)));
        }
        if t.surface.is_empty() {
            return Err(Error::invalid(id, format!("token {}: empty surface", t.index)));
        }
        if t.deprel.is_empty() {
            return Err(Error::invalid(id, format!("token {}: empty deprel", t.index)));
        }
        if t.head == 0 {
            roots += 1;
        }
    }
    let mut warnings = Vec::new();
    if roots != 1 {
        warnings.push(format!("sentence {id}: {roots} root tokens (expected 1)"));
    }
    Ok(warnings)
}

// ---------------------------------------------------------------------------
// Instance identifiers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Verb,
    Slot,
}

/// Identifies a verb instance (`sentence_id`) or a slot instance
/// (`sentence_id#slot_id`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstanceId {
    pub sentence_id: String,
    pub slot_id: Option<String>,
}

impl InstanceId {
    pub fn verb(sentence_id: &str) -> Self {
        Self {
            sentence_id: sentence_id.to_string(),
            slot_id: None,
        }
    }

    pub fn slot(sentence_id: &str, slot_id: &str) -> Self {
        Self {
            sentence_id: sentence_id.to_string(),
            slot_id: Some(slot_id.to_string()),
        }
    }

    pub fn kind(&self) -> InstanceKind {
        match self.slot_id {
            None => InstanceKind::Verb,
            Some(_) => InstanceKind::Slot,
        }
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.slot_id {
            None => f.write_str(&self.sentence_id),
            Some(slot) => write!(f, "{}#{}", self.sentence_id, slot),
        }
    }
}

impl FromStr for InstanceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::data("empty instance id"));
        }
        Ok(match s.split_once('#') {
            None => InstanceId::verb(s),
            Some((sid, slot)) => InstanceId::slot(sid, slot),
        })
    }
}

/// Instance ids in corpus order: one per sentence for verbs, one per slot
/// (sentence order, then slot order) for slots.
pub fn instance_ids(corpus: &[Sentence], kind: InstanceKind) -> Vec<InstanceId> {
    match kind {
        InstanceKind::Verb => corpus.iter().map(Sentence::verb_instance).collect(),
        InstanceKind::Slot => corpus
            .iter()
            .flat_map(|s| s.slots.iter().map(move |slot| s.slot_instance(slot)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// CoNLL-U

/// Parses CoNLL-U text. Multiword ranges (`1-2`) and empty nodes (`1.1`) are
/// skipped; sentences without a `# sent_id` comment get `s<ordinal>`.
pub fn parse_conllu(text: &str) -> Result<WithWarnings<Vec<ParsedSentence>>> {
    let mut sentences = Vec::new();
    let mut warnings = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut start_line = 1;

    let finish = |tokens: &mut Vec<Token>,
                      sent_id: &mut Option<String>,
                      start_line: usize,
                      sentences: &mut Vec<ParsedSentence>,
                      warnings: &mut Vec<String>|
     -> Result<()> {
        if tokens.is_empty() {
            *sent_id = None;
            return Ok(());
        }
        let ordinal = sentences.len() + 1;
        let id = sent_id.take().unwrap_or_else(|| {
            warnings.push(format!(
                "line {start_line}: sentence without sent_id, using s{ordinal}"
            ));
            format!("s{ordinal}")
        });
        let toks = std::mem::take(tokens);
        warnings.extend(validate_tree(&id, &toks)?);
        sentences.push(ParsedSentence { id, tokens: toks });
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            finish(&mut tokens, &mut sent_id, start_line, &mut sentences, &mut warnings)?;
            continue;
        }
        if tokens.is_empty() && sent_id.is_none() {
            start_line = lineno;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid token id {:?}", cols[0])))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-integer HEAD {:?}", cols[6])))?;
        tokens.push(Token {
            index,
            surface: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    finish(&mut tokens, &mut sent_id, start_line, &mut sentences, &mut warnings)?;
    Ok(WithWarnings::new(sentences, warnings))
}

// ---------------------------------------------------------------------------
// Task JSONL

#[derive(Serialize, Deserialize)]
struct TokenRecord {
    surface: String,
    lemma: String,
    upos: String,
    head: usize,
    deprel: String,
}

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    tokens: Vec<TokenRecord>,
    predicate: PredicateSpan,
    slots: Vec<SlotSpan>,
}

#[derive(Deserialize)]
struct AnnotationRecord {
    id: String,
    predicate: PredicateSpan,
    #[serde(default)]
    slots: Vec<SlotSpan>,
}

const SENTENCE_FIELDS: &[&str] = &["id", "tokens", "predicate", "slots"];
const ANNOTATION_FIELDS: &[&str] = &["id", "predicate", "slots"];
const TOKEN_FIELDS: &[&str] = &["surface", "lemma", "upos", "head", "deprel"];
const PREDICATE_FIELDS: &[&str] = &["token_indices", "gold_frame"];
const SLOT_FIELDS: &[&str] = &["slot_id", "token_indices", "gold_role"];

fn unknown_fields(value: &Value, known: &[&str], path: &str, line: usize, out: &mut Vec<String>) {
    if let Value::Object(map) = value {
        for key in map.keys() {
            if !known.contains(&key.as_str()) {
                out.push(format!("line {line}: ignoring unknown field {path}{key}"));
            }
        }
    }
}

fn check_unknown(value: &Value, top: &[&str], line: usize, out: &mut Vec<String>) {
    unknown_fields(value, top, "", line, out);
    if let Some(tokens) = value.get("tokens").and_then(Value::as_array) {
        for t in tokens {
            unknown_fields(t, TOKEN_FIELDS, "tokens[].", line, out);
        }
    }
    if let Some(p) = value.get("predicate") {
        unknown_fields(p, PREDICATE_FIELDS, "predicate.", line, out);
    }
    if let Some(slots) = value.get("slots").and_then(Value::as_array) {
        for s in slots {
            unknown_fields(s, SLOT_FIELDS, "slots[].", line, out);
        }
    }
}

fn json_lines(text: &str) -> impl Iterator<Item = (usize, Result<Value>)> + '_ {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            (
                line,
                serde_json::from_str::<Value>(l).map_err(|e| Error::parse(line, e.to_string())),
            )
        })
}

fn tokens_from_records(records: Vec<TokenRecord>) -> Vec<Token> {
    records
        .into_iter()
        .enumerate()
        .map(|(i, t)| Token {
            index: i + 1,
            surface: t.surface,
            lemma: t.lemma,
            upos: t.upos,
            head: t.head,
            deprel: t.deprel,
        })
        .collect()
}

/// Parses and validates the task JSONL format (one sentence object per line).
pub fn parse_task_jsonl(text: &str) -> Result<WithWarnings<Vec<Sentence>>> {
    let mut sentences = Vec::new();
    let mut warnings = Vec::new();
    let mut ids = HashSet::new();
    for (line, value) in json_lines(text) {
        let value = value?;
        check_unknown(&value, SENTENCE_FIELDS, line, &mut warnings);
        let record: SentenceRecord =
            serde_json::from_value(value).map_err(|e| Error::parse(line, e.to_string()))?;
        if !ids.insert(record.id.clone()) {
            return Err(Error::invalid(&record.id, "duplicate sentence id"));
        }
        let sentence = Sentence::new(
            record.id,
            tokens_from_records(record.tokens),
            record.predicate,
            record.slots,
        )?;
        warnings.extend(sentence.warnings);
        sentences.push(sentence.value);
    }
    Ok(WithWarnings::new(sentences, warnings))
}

/// Serializes sentences to task JSONL; `parse_task_jsonl` inverts it.
pub fn to_task_jsonl(corpus: &[Sentence]) -> String {
    let mut out = String::new();
    for s in corpus {
        let record = SentenceRecord {
            id: s.id.clone(),
            tokens: s
                .tokens
                .iter()
                .map(|t| TokenRecord {
                    surface: t.surface.clone(),
                    lemma: t.lemma.clone(),
                    upos: t.upos.clone(),
                    head: t.head,
                    deprel: t.deprel.clone(),
                })
                .collect(),
            predicate: s.predicate.clone(),
            slots: s.slots.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("sentence record serializes"));
        out.push('\n');
    }
    out
}

/// Attaches highlight annotations (JSONL lines with `id`, `predicate`,
/// `slots`) to CoNLL-U sentences. Sentences without an annotation are dropped
/// with a warning; annotations for unknown sentences are an error.
pub fn attach_annotations(
    parsed: Vec<ParsedSentence>,
    annotations: &str,
) -> Result<WithWarnings<Vec<Sentence>>> {
    let mut warnings = Vec::new();
    let mut by_id: BTreeMap<String, AnnotationRecord> = BTreeMap::new();
    for (line, value) in json_lines(annotations) {
        let value = value?;
        check_unknown(&value, ANNOTATION_FIELDS, line, &mut warnings);
        let record: AnnotationRecord =
            serde_json::from_value(value).map_err(|e| Error::parse(line, e.to_string()))?;
        if by_id.contains_key(&record.id) {
            return Err(Error::invalid(&record.id, "duplicate annotation"));
        }
        by_id.insert(record.id.clone(), record);
    }

    let mut sentences = Vec::new();
    let mut seen = HashSet::new();
    for p in parsed {
        if !seen.insert(p.id.clone()) {
            return Err(Error::invalid(&p.id, "duplicate sentence id"));
        }
        match by_id.remove(&p.id) {
            Some(a) => {
                let s = Sentence::new(p.id, p.tokens, a.predicate, a.slots)?;
                warnings.extend(s.warnings);
                sentences.push(s.value);
            }
            None => warnings.push(format!("sentence {}: no annotation, skipped", p.id)),
        }
    }
    if let Some(id) = by_id.keys().next() {
        return Err(Error::invalid(id, "annotation refers to an unknown sentence"));
    }
    Ok(WithWarnings::new(sentences, warnings))
}
