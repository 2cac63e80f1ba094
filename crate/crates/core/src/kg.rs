//! In-memory knowledge graph: dense-id vocabularies, a deduplicated triplet
//! store and train/dev/test split labels.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::FxHashMap;

/// Dense index into a [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VocabId(pub u32);

impl VocabId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VocabId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijective label ↔ id mapping. Ids are handed out densely from zero.
///
/// Once frozen, [`Vocabulary::intern`] only resolves existing labels and
/// rejects new ones.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    kind: &'static str,
    labels: Vec<String>,
    index: FxHashMap<String, VocabId>,
    frozen: bool,
}

impl Vocabulary {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            labels: Vec::new(),
            index: FxHashMap::default(),
            frozen: false,
        }
    }

    /// Builds a frozen vocabulary where the i-th label gets id i.
    pub fn from_labels<I, S>(kind: &'static str, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new(kind);
        for (line, label) in labels.into_iter().enumerate() {
            let label = label.into();
            if vocab.index.contains_key(&label) {
                return Err(Error::Malformed {
                    line: line + 1,
                    reason: alloc::format!("duplicate {kind} label `{label}`"),
                });
            }
            vocab.intern(&label)?;
        }
        vocab.freeze();
        Ok(vocab)
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn intern(&mut self, label: &str) -> Result<VocabId> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if let Some(&id) = self.index.get(label) {
            return Ok(id);
        }
        if self.frozen {
            return Err(Error::UnknownLabel {
                kind: self.kind,
                label: label.to_string(),
            });
        }
        let id = VocabId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, label: &str) -> Option<VocabId> {
        self.index.get(label).copied()
    }

    pub fn lookup(&self, label: &str) -> Result<VocabId> {
        self.get(label).ok_or_else(|| Error::UnknownLabel {
            kind: self.kind,
            label: label.to_string(),
        })
    }

    pub fn resolve(&self, id: VocabId) -> Option<&str> {
        self.labels.get(id.index()).map(String::as_str)
    }

    pub fn label(&self, id: VocabId) -> Result<&str> {
        self.resolve(id).ok_or(Error::UnknownId {
            kind: self.kind,
            id: id.0,
            size: self.labels.len(),
        })
    }

    pub fn check(&self, id: VocabId) -> Result<()> {
        self.label(id).map(|_| ())
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ids(&self) -> impl Iterator<Item = VocabId> + '_ {
        (0..self.labels.len() as u32).map(VocabId)
    }

    /// Text checkpoint: one label per line, line number = id.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push_str(label);
            out.push('\n');
        }
        out
    }

    pub fn from_text(kind: &'static str, text: &str) -> Result<Self> {
        Self::from_labels(kind, text.lines())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triplet {
    pub head: VocabId,
    pub predicate: VocabId,
    pub tail: VocabId,
}

impl Triplet {
    pub const fn new(head: VocabId, predicate: VocabId, tail: VocabId) -> Self {
        Self {
            head,
            predicate,
            tail,
        }
    }

    pub fn pair(&self, orientation: Orientation) -> EntityPredicatePair {
        let entity = match orientation {
            Orientation::SubjectKnown => self.head,
            Orientation::ObjectKnown => self.tail,
        };
        EntityPredicatePair::new(entity, self.predicate, orientation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Split::Train => 1,
            Split::Dev => 2,
            Split::Test => 4,
        }
    }
}

/// A set of splits, used to restrict membership queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SplitScope(u8);

impl SplitScope {
    pub const NONE: SplitScope = SplitScope(0);
    pub const TRAIN: SplitScope = SplitScope(1);
    pub const DEV: SplitScope = SplitScope(2);
    pub const TEST: SplitScope = SplitScope(4);
    pub const TRAIN_DEV: SplitScope = SplitScope(3);
    pub const ALL: SplitScope = SplitScope(7);

    pub fn with(self, split: Split) -> Self {
        SplitScope(self.0 | split.bit())
    }

    #[inline]
    pub fn includes(self, split: Split) -> bool {
        self.0 & split.bit() != 0
    }
}

impl From<Split> for SplitScope {
    fn from(split: Split) -> Self {
        SplitScope(split.bit())
    }
}

/// Which side of a triplet an entity–predicate pair fixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// `(entity, predicate, ?)`: the object is missing.
    SubjectKnown,
    /// `(?, predicate, entity)`: the subject is missing.
    ObjectKnown,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::SubjectKnown => "SubjectKnown",
            Orientation::ObjectKnown => "ObjectKnown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "SubjectKnown" | "subject" => Some(Orientation::SubjectKnown),
            "ObjectKnown" | "object" => Some(Orientation::ObjectKnown),
            _ => None,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A triplet with one entity slot open.
///
/// Pairs order by `(predicate, entity, orientation)`, which is the tiebreak
/// used wherever pairs are ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EntityPredicatePair {
    pub entity: VocabId,
    pub predicate: VocabId,
    pub orientation: Orientation,
}

impl EntityPredicatePair {
    pub const fn new(entity: VocabId, predicate: VocabId, orientation: Orientation) -> Self {
        Self {
            entity,
            predicate,
            orientation,
        }
    }

    /// Fills the open slot with `other`.
    pub fn complete(&self, other: VocabId) -> Triplet {
        match self.orientation {
            Orientation::SubjectKnown => Triplet::new(self.entity, self.predicate, other),
            Orientation::ObjectKnown => Triplet::new(other, self.predicate, self.entity),
        }
    }
}

impl Ord for EntityPredicatePair {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.predicate, self.entity, self.orientation).cmp(&(
            other.predicate,
            other.entity,
            other.orientation,
        ))
    }
}

impl PartialOrd for EntityPredicatePair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deduplicated triplet set over frozen vocabularies with a split label per
/// triplet. Immutable once built.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    entities: Vocabulary,
    predicates: Vocabulary,
    triplets: Vec<Triplet>,
    splits: Vec<Split>,
    index: FxHashMap<Triplet, u32>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.entities.labels() == other.entities.labels()
            && self.predicates.labels() == other.predicates.labels()
            && self.triplets == other.triplets
            && self.splits == other.splits
    }
}

impl KnowledgeGraph {
    /// Builds a graph with every triplet in the train split. Duplicates are
    /// collapsed (first occurrence wins); ids must resolve and every
    /// vocabulary entry must be referenced by some triplet.
    pub fn from_triplets(
        mut entities: Vocabulary,
        mut predicates: Vocabulary,
        triplets: impl IntoIterator<Item = Triplet>,
    ) -> Result<Self> {
        entities.freeze();
        predicates.freeze();
        let mut kept = Vec::new();
        let mut index = FxHashMap::default();
        let mut seen_entities = alloc::vec![false; entities.len()];
        let mut seen_predicates = alloc::vec![false; predicates.len()];
        for t in triplets {
            entities.check(t.head)?;
            entities.check(t.tail)?;
            predicates.check(t.predicate)?;
            if index.contains_key(&t) {
                continue;
            }
            index.insert(t, kept.len() as u32);
            kept.push(t);
            seen_entities[t.head.index()] = true;
            seen_entities[t.tail.index()] = true;
            seen_predicates[t.predicate.index()] = true;
        }
        if let Some(i) = seen_entities.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(alloc::format!(
                "entity `{}` is not referenced by any triplet",
                entities.labels[i]
            )));
        }
        if let Some(i) = seen_predicates.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(alloc::format!(
                "predicate `{}` is not referenced by any triplet",
                predicates.labels[i]
            )));
        }
        let splits = alloc::vec![Split::Train; kept.len()];
        Ok(Self {
            entities,
            predicates,
            triplets: kept,
            splits,
            index,
        })
    }

    /// Builds a graph from per-split triplet lists over shared vocabularies.
    pub fn from_splits(
        entities: Vocabulary,
        predicates: Vocabulary,
        train: Vec<Triplet>,
        dev: Vec<Triplet>,
        test: Vec<Triplet>,
    ) -> Result<Self> {
        let labels: Vec<Split> = core::iter::repeat_n(Split::Train, train.len())
            .chain(core::iter::repeat_n(Split::Dev, dev.len()))
            .chain(core::iter::repeat_n(Split::Test, test.len()))
            .collect();
        let all: Vec<Triplet> = train.into_iter().chain(dev).chain(test).collect();
        let total = all.len();
        let kg = Self::from_triplets(entities, predicates, all)?;
        if kg.len() != total {
            return Err(Error::InvalidArgument(
                "a triplet appears more than once across splits".into(),
            ));
        }
        kg.with_splits(labels)
    }

    /// Replaces the split labels; `splits[i]` labels the i-th stored triplet.
    pub fn with_splits(mut self, splits: Vec<Split>) -> Result<Self> {
        if splits.len() != self.triplets.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} split labels for {} triplets",
                splits.len(),
                self.triplets.len()
            )));
        }
        self.splits = splits;
        Ok(self)
    }

    pub fn entities(&self) -> &Vocabulary {
        &self.entities
    }

    pub fn predicates(&self) -> &Vocabulary {
        &self.predicates
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triplet, Split)> + '_ {
        self.triplets
            .iter()
            .copied()
            .zip(self.splits.iter().copied())
    }

    pub fn iter_scope(&self, scope: SplitScope) -> impl Iterator<Item = Triplet> + '_ {
        self.iter()
            .filter(move |(_, s)| scope.includes(*s))
            .map(|(t, _)| t)
    }

    pub fn split_sizes(&self) -> [usize; 3] {
        let mut sizes = [0; 3];
        for s in &self.splits {
            sizes[*s as usize] += 1;
        }
        sizes
    }

    pub fn check_triplet(&self, t: &Triplet) -> Result<()> {
        self.entities.check(t.head)?;
        self.predicates.check(t.predicate)?;
        self.entities.check(t.tail)
    }

    /// Membership restricted to `scope`, rejecting unresolvable ids.
    pub fn contains_triplet(&self, t: &Triplet, scope: SplitScope) -> Result<bool> {
        self.check_triplet(t)?;
        Ok(self.contains(t, scope))
    }

    /// Unchecked variant of [`KnowledgeGraph::contains_triplet`] for hot loops.
    #[inline]
    pub fn contains(&self, t: &Triplet, scope: SplitScope) -> bool {
        self.split_of(t).is_some_and(|s| scope.includes(s))
    }

    #[inline]
    pub fn split_of(&self, t: &Triplet) -> Option<Split> {
        self.index.get(t).map(|&i| self.splits[i as usize])
    }

    /// Distinct entity–predicate pairs occurring in `scope`.
    pub fn pairs_of(
        &self,
        scope: SplitScope,
        orientation: Orientation,
    ) -> BTreeSet<EntityPredicatePair> {
        self.iter_scope(scope)
            .map(|t| t.pair(orientation))
            .collect()
    }
}
