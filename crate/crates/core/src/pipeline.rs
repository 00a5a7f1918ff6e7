//! Frame induction (verb clustering), role induction (argument clustering),
//! the merge into frame-specific slots, and the baseline labelers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{agglomerate, pairwise_distances, Dendrogram, Linkage, Metric};
use crate::corpus::{instance_ids, InstanceId, InstanceKind, Sentence, SlotSpan};
use crate::embeddings::{
    compute_idf, context_vector, span_vector, verb_vector, ContextualVectorFile, EmbeddingStore,
    Weighting,
};
use crate::features::{
    assemble, in_out_dependency_vector, inbound_dependency_vector, index_feature,
    slot_boolean_feature, BlockSource, DepLabelIndex, FeatureMatrix,
};
use crate::labeling::{GoldLabeling, Labeling};
use crate::logreg::{self, LogRegModel, TrainConfig};
use crate::{Error, Result};

/// Reserved role for slots that received no role label.
pub const UNKNOWN_ROLE: &str = "UKN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subtask {
    A,
    B1,
    B2,
}

impl Subtask {
    /// Instances the subtask labels.
    pub fn instance_kind(self) -> InstanceKind {
        match self {
            Subtask::A => InstanceKind::Verb,
            Subtask::B1 | Subtask::B2 => InstanceKind::Slot,
        }
    }
}

/// Where one block of an instance vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VectorSource {
    /// tf-idf weighted mean of the sentence's static word vectors.
    #[serde(rename = "context-tfidf")]
    ContextTfidf,
    /// Precomputed sentence vector, keyed by sentence id.
    #[serde(rename = "context-file")]
    ContextFile,
    /// Static vector of the target: the predicate's first word for verb
    /// instances, the mean over the slot's tokens for slot instances.
    #[serde(rename = "word")]
    Word,
    /// Static vector of the predicate's first word.
    #[serde(rename = "verb")]
    Verb,
    /// Like `word`, from precomputed token vectors (`sentence_id@index`).
    #[serde(rename = "word-file")]
    WordFile,
    /// Like `verb`, from precomputed token vectors.
    #[serde(rename = "verb-file")]
    VerbFile,
    /// Inbound dependency labels (-1 entries).
    #[serde(rename = "ID")]
    Inbound,
    /// Inbound (-1) and outbound (+1) dependency labels.
    #[serde(rename = "OD")]
    InOut,
    /// Verb-before-slot flag.
    #[serde(rename = "B")]
    Boolean,
    /// Slot ordinal.
    #[serde(rename = "123")]
    Ordinal,
}

impl VectorSource {
    pub fn name(self) -> &'static str {
        match self {
            VectorSource::ContextTfidf => "context-tfidf",
            VectorSource::ContextFile => "context-file",
            VectorSource::Word => "word",
            VectorSource::Verb => "verb",
            VectorSource::WordFile => "word-file",
            VectorSource::VerbFile => "verb-file",
            VectorSource::Inbound => "ID",
            VectorSource::InOut => "OD",
            VectorSource::Boolean => "B",
            VectorSource::Ordinal => "123",
        }
    }

    fn slot_only(self) -> bool {
        matches!(
            self,
            VectorSource::Inbound | VectorSource::InOut | VectorSource::Boolean | VectorSource::Ordinal
        )
    }

    fn needs_store(self) -> bool {
        matches!(self, VectorSource::ContextTfidf | VectorSource::Word | VectorSource::Verb)
    }

    fn needs_contextual(self) -> bool {
        matches!(
            self,
            VectorSource::ContextFile | VectorSource::WordFile | VectorSource::VerbFile
        )
    }
}

impl fmt::Display for VectorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VectorSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config(format!("unknown vector source {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub subtask: Subtask,
    pub recipe: Vec<VectorSource>,
    pub normalize: bool,
    pub metric: Metric,
    pub linkage: Linkage,
    pub k: usize,
    pub vectors: Option<PathBuf>,
    pub contextual_vectors: Option<PathBuf>,
    pub lowercase: bool,
    pub weighting: Weighting,
    /// Multiplier per block name, applied before normalization.
    pub block_scale: BTreeMap<String, f64>,
    pub seed: u64,
    pub train: TrainConfig,
}

impl PipelineConfig {
    /// Verb clustering: normalized [context, word], manhattan, average, 150.
    pub fn subtask_a() -> Self {
        Self {
            subtask: Subtask::A,
            recipe: vec![VectorSource::ContextTfidf, VectorSource::Word],
            normalize: true,
            metric: Metric::Manhattan,
            linkage: Linkage::Average,
            k: 150,
            vectors: None,
            contextual_vectors: None,
            lowercase: false,
            weighting: Weighting::Tfidf,
            block_scale: BTreeMap::new(),
            seed: 0,
            train: TrainConfig::default(),
        }
    }

    /// Argument clustering: [context, ID], euclidean, ward, 2.
    pub fn subtask_b2() -> Self {
        Self {
            subtask: Subtask::B2,
            recipe: vec![VectorSource::ContextTfidf, VectorSource::Inbound],
            normalize: false,
            metric: Metric::Euclidean,
            linkage: Linkage::Ward,
            k: 2,
            ..Self::subtask_a()
        }
    }

    pub fn for_subtask(subtask: Subtask) -> Self {
        match subtask {
            Subtask::A => Self::subtask_a(),
            Subtask::B1 => Self {
                subtask: Subtask::B1,
                ..Self::subtask_b2()
            },
            Subtask::B2 => Self::subtask_b2(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        if self.recipe.is_empty() {
            return Err(Error::config("recipe must name at least one block"));
        }
        if self.linkage == Linkage::Ward && self.metric != Metric::Euclidean {
            return Err(Error::config(format!(
                "ward requires euclidean affinity, got {}",
                self.metric
            )));
        }
        if self.subtask.instance_kind() == InstanceKind::Verb {
            if let Some(s) = self.recipe.iter().find(|s| s.slot_only()) {
                return Err(Error::config(format!(
                    "block {s} is only defined for slot instances"
                )));
            }
        }
        for (name, scale) in &self.block_scale {
            if !scale.is_finite() {
                return Err(Error::config(format!("block_scale.{name} must be finite")));
            }
            if !self.recipe.iter().any(|s| s.name() == name) {
                return Err(Error::config(format!(
                    "block_scale.{name} does not match any recipe block"
                )));
            }
        }
        self.train.validate()
    }

    fn scale(&self, source: VectorSource) -> f64 {
        self.block_scale.get(source.name()).copied().unwrap_or(1.0)
    }
}

/// Config-file keys. Every key is optional and overrides the subtask defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub subtask: Option<Subtask>,
    pub recipe: Option<Vec<VectorSource>>,
    pub normalize: Option<bool>,
    pub metric: Option<Metric>,
    pub linkage: Option<Linkage>,
    pub k: Option<usize>,
    pub vectors: Option<PathBuf>,
    pub contextual_vectors: Option<PathBuf>,
    pub lowercase: Option<bool>,
    pub weighting: Option<Weighting>,
    pub block_scale: Option<BTreeMap<String, f64>>,
    pub seed: Option<u64>,
    pub learning_rate: Option<f64>,
    pub max_epochs: Option<usize>,
    pub l2: Option<f64>,
    pub tolerance: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    /// Applies the overrides on top of `base`; `subtask` in the file is
    /// checked against `base` rather than replacing it.
    pub fn apply(self, mut base: PipelineConfig) -> Result<PipelineConfig> {
        if let Some(s) = self.subtask {
            if s != base.subtask {
                return Err(Error::config(format!(
                    "config is for subtask {s:?} but the command runs {:?}",
                    base.subtask
                )));
            }
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { base.$field = v; })* };
        }
        set!(recipe, normalize, metric, linkage, k, lowercase, weighting, block_scale, seed);
        if self.vectors.is_some() {
            base.vectors = self.vectors;
        }
        if self.contextual_vectors.is_some() {
            base.contextual_vectors = self.contextual_vectors;
        }
        let t = &mut base.train;
        if let Some(v) = self.learning_rate {
            t.learning_rate = v;
        }
        if let Some(v) = self.max_epochs {
            t.max_epochs = v;
        }
        if let Some(v) = self.l2 {
            t.l2 = v;
        }
        if let Some(v) = self.tolerance {
            t.tolerance = v;
        }
        if let Some(v) = self.seed {
            t.seed = v;
        }
        Ok(base)
    }
}

/// Loaded vector resources.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub store: Option<EmbeddingStore>,
    pub contextual: Option<ContextualVectorFile>,
}

impl Resources {
    fn check(&self, config: &PipelineConfig) -> Result<()> {
        if let Some(s) = config.recipe.iter().find(|s| s.needs_store()) {
            if self.store.is_none() {
                return Err(Error::config(format!("block {s} needs a word-vector file")));
            }
        }
        if let Some(s) = config.recipe.iter().find(|s| s.needs_contextual()) {
            if self.contextual.is_none() {
                return Err(Error::config(format!(
                    "block {s} needs a contextual-vector file"
                )));
            }
        }
        Ok(())
    }
}

type Located<'a> = (&'a Sentence, Option<(usize, &'a SlotSpan)>);

/// Resolves instance ids back to their sentence and slot.
struct InstanceIndex<'a> {
    map: HashMap<InstanceId, Located<'a>>,
}

impl<'a> InstanceIndex<'a> {
    fn new(corpus: &'a [Sentence]) -> Self {
        let mut map = HashMap::new();
        for s in corpus {
            map.insert(s.verb_instance(), (s, None));
            for (i, slot) in s.slots.iter().enumerate() {
                map.insert(s.slot_instance(slot), (s, Some((i + 1, slot))));
            }
        }
        Self { map }
    }

    fn get(&self, id: &InstanceId) -> Result<(&'a Sentence, Option<(usize, &'a SlotSpan)>)> {
        self.map
            .get(id)
            .copied()
            .ok_or_else(|| Error::data(format!("unknown instance {id}")))
    }
}

fn token_file_mean(file: &ContextualVectorFile, sentence: &Sentence, indices: &[usize]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; file.dim()];
    for &i in indices {
        let v = file.require(&ContextualVectorFile::token_key(&sentence.id, i))?;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = indices.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Builds the configured instance vectors for `kind` instances of `corpus`.
/// `labels` fixes the dependency-label vocabulary; by default it is built
/// from the corpus itself.
pub fn build_features(
    corpus: &[Sentence],
    config: &PipelineConfig,
    resources: &Resources,
    kind: InstanceKind,
    labels: Option<&DepLabelIndex>,
) -> Result<FeatureMatrix> {
    config.validate()?;
    resources.check(config)?;
    if kind == InstanceKind::Verb {
        if let Some(s) = config.recipe.iter().find(|s| s.slot_only()) {
            return Err(Error::config(format!("block {s} is only defined for slot instances")));
        }
    }
    let owned_index;
    let dep_index = match labels {
        Some(l) => l,
        None => {
            owned_index = DepLabelIndex::build(corpus);
            &owned_index
        }
    };
    let idf = if config.recipe.contains(&VectorSource::ContextTfidf) {
        Some(compute_idf(corpus)?)
    } else {
        None
    };
    let index = InstanceIndex::new(corpus);
    let index = &index;
    let store = resources.store.as_ref();
    let contextual = resources.contextual.as_ref();
    let idf = idf.as_ref();

    let blocks: Vec<BlockSource> = config
        .recipe
        .iter()
        .map(|&source| {
            let scale = config.scale(source);
            let weighting = config.weighting;
            BlockSource::new(source.name(), move |id: &InstanceId| {
                let (sentence, slot) = index.get(id)?;
                let slot_required = || {
                    slot.ok_or_else(|| {
                        Error::config(format!("block {source} is only defined for slot instances"))
                    })
                };
                let mut v = match source {
                    VectorSource::ContextTfidf => context_vector(
                        sentence,
                        store.expect("checked"),
                        idf.expect("computed"),
                        weighting,
                    ),
                    VectorSource::ContextFile => {
                        contextual.expect("checked").require(&sentence.id)?.to_vec()
                    }
                    VectorSource::Verb => {
                        verb_vector(store.expect("checked"), &sentence.predicate_surfaces())
                    }
                    VectorSource::Word => match slot {
                        None => verb_vector(store.expect("checked"), &sentence.predicate_surfaces()),
                        Some((_, s)) => {
                            let surfaces: Vec<&str> = sentence.surfaces(&s.token_indices).collect();
                            span_vector(store.expect("checked"), &surfaces)
                        }
                    },
                    VectorSource::VerbFile => token_file_mean(
                        contextual.expect("checked"),
                        sentence,
                        &sentence.predicate.token_indices[..1],
                    )?,
                    VectorSource::WordFile => {
                        let indices = match slot {
                            None => &sentence.predicate.token_indices[..1],
                            Some((_, s)) => &s.token_indices[..],
                        };
                        token_file_mean(contextual.expect("checked"), sentence, indices)?
                    }
                    VectorSource::Inbound => {
                        inbound_dependency_vector(sentence, slot_required()?.1, dep_index)?
                    }
                    VectorSource::InOut => {
                        in_out_dependency_vector(sentence, slot_required()?.1, dep_index)?
                    }
                    VectorSource::Boolean => {
                        vec![f64::from(slot_boolean_feature(sentence, slot_required()?.1))]
                    }
                    VectorSource::Ordinal => vec![index_feature(slot_required()?.0) as f64],
                };
                if scale != 1.0 {
                    v.iter_mut().for_each(|x| *x *= scale);
                }
                Ok(v)
            })
        })
        .collect();

    assemble(&blocks, &instance_ids(corpus, kind), config.normalize)
}

/// Result of one clustering run.
#[derive(Debug, Clone)]
pub struct Induction {
    pub labeling: Labeling,
    pub dendrogram: Dendrogram,
}

fn induce(
    corpus: &[Sentence],
    config: &PipelineConfig,
    resources: &Resources,
    kind: InstanceKind,
    prefix: &str,
) -> Result<Induction> {
    let features = build_features(corpus, config, resources, kind, None)?;
    if features.is_empty() {
        return Err(Error::data("no instances to cluster"));
    }
    if config.k > features.len() {
        return Err(Error::config(format!(
            "k = {} exceeds the number of instances ({})",
            config.k,
            features.len()
        )));
    }
    let dist = pairwise_distances(&features.rows, config.metric)?;
    let (dendrogram, clustering) = agglomerate(&dist, config.linkage, config.k)?;
    let inversions = dendrogram.inversions();
    if !inversions.is_empty() {
        log::warn!(
            "dendrogram has {} height inversion(s), first at merge {}",
            inversions.len(),
            inversions[0]
        );
    }
    let mut labeling = Labeling::new();
    for (id, c) in features.instance_ids.iter().zip(&clustering.assignment) {
        labeling.insert(id, format!("{prefix}{c}"));
    }
    Ok(Induction {
        labeling,
        dendrogram,
    })
}

/// Clusters verb instances into frames (labels `f0`, `f1`, ...).
pub fn run_subtask_a(corpus: &[Sentence], config: &PipelineConfig, resources: &Resources) -> Result<Induction> {
    if config.subtask != Subtask::A {
        return Err(Error::config("run_subtask_a needs a subtask A configuration"));
    }
    induce(corpus, config, resources, InstanceKind::Verb, "f")
}

/// Clusters slot instances into generic roles (labels `r0`, `r1`, ...).
pub fn run_subtask_b2(corpus: &[Sentence], config: &PipelineConfig, resources: &Resources) -> Result<Induction> {
    if config.subtask != Subtask::B2 {
        return Err(Error::config("run_subtask_b2 needs a subtask B2 configuration"));
    }
    induce(corpus, config, resources, InstanceKind::Slot, "r")
}

fn sanitize(label: &str) -> String {
    label.replace('.', "_")
}

/// Combines frame labels of verb instances with role labels of slot instances
/// into `<frame>.<role>` per slot; slots without a role get `<frame>.UKN`.
pub fn merge_b1(frames: &Labeling, roles: &Labeling, corpus: &[Sentence]) -> Result<Labeling> {
    let mut out = Labeling::new();
    for s in corpus {
        let verb = s.verb_instance();
        let frame = frames.label(&verb).ok_or_else(|| {
            Error::data(format!("frame labeling has no entry for verb instance {verb}"))
        })?;
        let frame = sanitize(frame);
        for slot in &s.slots {
            let id = s.slot_instance(slot);
            let role = roles.label(&id).map_or_else(|| UNKNOWN_ROLE.to_string(), sanitize);
            out.insert(&id, format!("{frame}.{role}"));
        }
    }
    Ok(out)
}

/// One cluster per predicate lemma (first predicate token, lowercased).
pub fn baseline_cluster_per_verb(corpus: &[Sentence]) -> Labeling {
    let mut out = Labeling::new();
    for s in corpus {
        let first = s.token(s.predicate.token_indices[0]);
        out.insert(&s.verb_instance(), first.lemma.to_lowercase());
    }
    out
}

/// The token of a span whose head lies outside it (first one on ties).
pub fn slot_head(sentence: &Sentence, slot: &SlotSpan) -> usize {
    slot.token_indices
        .iter()
        .copied()
        .find(|&i| !slot.token_indices.contains(&sentence.token(i).head))
        .unwrap_or(slot.token_indices[0])
}

/// One cluster per dependency relation of the slot's syntactic head.
pub fn baseline_cluster_per_dep_role(corpus: &[Sentence]) -> Labeling {
    let mut out = Labeling::new();
    for s in corpus {
        for slot in &s.slots {
            let head = slot_head(s, slot);
            out.insert(&s.slot_instance(slot), s.token(head).deprel.clone());
        }
    }
    out
}

/// `0` when the verb precedes the slot, `1` otherwise.
pub fn baseline_boolean(corpus: &[Sentence]) -> Labeling {
    let mut out = Labeling::new();
    for s in corpus {
        for slot in &s.slots {
            out.insert(&s.slot_instance(slot), slot_boolean_feature(s, slot).to_string());
        }
    }
    out
}

/// The slot's 1-based ordinal within its sentence.
pub fn baseline_123(corpus: &[Sentence]) -> Labeling {
    let mut out = Labeling::new();
    for s in corpus {
        for (i, slot) in s.slots.iter().enumerate() {
            out.insert(&s.slot_instance(slot), index_feature(i + 1).to_string());
        }
    }
    out
}

/// Gold frames of the sentences that carry one.
pub fn gold_frames(corpus: &[Sentence]) -> GoldLabeling {
    let mut out = Labeling::new();
    for s in corpus {
        if let Some(f) = &s.predicate.gold_frame {
            out.insert(&s.verb_instance(), f.clone());
        }
    }
    out
}

/// Gold generic roles of the slots that carry one.
pub fn gold_roles(corpus: &[Sentence]) -> GoldLabeling {
    let mut out = Labeling::new();
    for s in corpus {
        for slot in &s.slots {
            if let Some(r) = &slot.gold_role {
                out.insert(&s.slot_instance(slot), r.clone());
            }
        }
    }
    out
}

/// Gold `<frame>.<role>` labels of slots whose sentence has a gold frame and
/// which carry a gold role.
pub fn gold_slots(corpus: &[Sentence]) -> GoldLabeling {
    let mut out = Labeling::new();
    for s in corpus {
        let Some(frame) = &s.predicate.gold_frame else { continue };
        for slot in &s.slots {
            if let Some(role) = &slot.gold_role {
                out.insert(
                    &s.slot_instance(slot),
                    format!("{}.{}", sanitize(frame), sanitize(role)),
                );
            }
        }
    }
    out
}

/// A trained classifier together with what is needed to rebuild its features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub model: LogRegModel,
    pub subtask: Subtask,
    pub recipe: Vec<VectorSource>,
    pub normalize: bool,
    pub dep_labels: Vec<String>,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelFile = serde_json::from_str(text).map_err(|e| Error::data(format!("model file: {e}")))?;
        if m.model.weights.len() != m.model.classes.len()
            || m.model.weights.iter().any(|w| w.len() != m.model.dim + 1)
        {
            return Err(Error::data("model file: weight matrix does not match classes/dim"));
        }
        Ok(m)
    }
}

/// Trains the logistic-regression labeler on `corpus` with gold labels for
/// every instance of the configured subtask. `extra` corpora only widen the
/// dependency-label vocabulary (pass the corpora you will predict on).
pub fn train_logreg(
    corpus: &[Sentence],
    extra: &[&[Sentence]],
    gold: &GoldLabeling,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<ModelFile> {
    let labels = DepLabelIndex::build(corpus.iter().chain(extra.iter().flat_map(|c| c.iter())));
    let kind = config.subtask.instance_kind();
    let features = build_features(corpus, config, resources, kind, Some(&labels))?;
    let model = logreg::train(&features, gold, &config.train)?;
    Ok(ModelFile {
        model,
        subtask: config.subtask,
        recipe: config.recipe.clone(),
        normalize: config.normalize,
        dep_labels: labels.labels().to_vec(),
    })
}

/// Labels the instances of `corpus` with a trained model. The recipe and
/// normalization stored in the model override those of `config`.
pub fn predict_logreg(
    model: &ModelFile,
    corpus: &[Sentence],
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<Labeling> {
    let mut config = config.clone();
    config.subtask = model.subtask;
    config.recipe = model.recipe.clone();
    config.normalize = model.normalize;
    config.block_scale.retain(|k, _| model.recipe.iter().any(|s| s.name() == k));
    let labels = DepLabelIndex::from_labels(model.dep_labels.iter().cloned());
    let features = build_features(corpus, &config, resources, model.subtask.instance_kind(), Some(&labels))
        .map_err(|e| match e {
            Error::Data(m) if m.contains("label index") => Error::data(format!(
                "{m}; retrain with this corpus passed as an extra corpus"
            )),
            other => other,
        })?;
    model.model.predict(&features)
}
