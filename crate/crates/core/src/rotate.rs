//! RotatE embeddings.
//!
//! Entities are complex vectors stored as `[re_0 .. re_{d-1}, im_0 .. im_{d-1}]`;
//! predicates are phase vectors θ, so every rotation `e^{iθ}` has unit
//! modulus by construction. The distance is `‖h ∘ r − t‖` with either the
//! L1 norm over per-coordinate complex moduli or the Euclidean norm, and the
//! score is `γ − distance`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kg::{KnowledgeGraph, SplitScope, Triplet, VocabId};
use crate::seed::{self, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn as_str(self) -> &'static str {
        match self {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
        }
    }

    pub fn parse(s: &str) -> Option<Norm> {
        match s {
            "L1" | "l1" => Some(Norm::L1),
            "L2" | "l2" => Some(Norm::L2),
            _ => None,
        }
    }
}

/// Cached predicate rotations of a fixed model.
#[derive(Clone, Debug)]
pub struct Rotations {
    dim: usize,
    sincos: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub gamma: f64,
    /// Negatives per positive (`n`).
    pub negatives: usize,
    /// Divisor applied to each negative term (`k`); defaults to `negatives`.
    pub negative_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub norm: Norm,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            gamma: 12.0,
            negatives: 8,
            negative_weight: 8.0,
            learning_rate: 1e-2,
            epochs: 100,
            batch_size: 128,
            seed: 0,
            norm: Norm::L1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be a positive finite number");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.negative_weight > 0.0 && self.negative_weight.is_finite()) {
            return bad("negative_weight must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + libm::log1p(libm::exp(-libm::fabs(x)))
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `−log σ(x)`.
#[inline]
pub fn neg_log_sigmoid(x: f64) -> f64 {
    softplus(-x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotatEModel {
    dim: usize,
    gamma: f64,
    norm: Norm,
    entities: Vec<f64>,
    phases: Vec<f64>,
}

/// Sparse gradient over the parameters touched by a set of triplets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradient {
    pub entities: BTreeMap<VocabId, Vec<f64>>,
    pub predicates: BTreeMap<VocabId, Vec<f64>>,
}

impl Gradient {
    fn entity_mut(&mut self, id: VocabId, dim: usize) -> &mut Vec<f64> {
        self.entities
            .entry(id)
            .or_insert_with(|| vec![0.0; 2 * dim])
    }

    fn predicate_mut(&mut self, id: VocabId, dim: usize) -> &mut Vec<f64> {
        self.predicates.entry(id).or_insert_with(|| vec![0.0; dim])
    }

    pub fn add(&mut self, other: &Gradient) {
        for (id, g) in &other.entities {
            let dst = self
                .entities
                .entry(*id)
                .or_insert_with(|| vec![0.0; g.len()]);
            dst.iter_mut().zip(g).for_each(|(d, s)| *d += s);
        }
        for (id, g) in &other.predicates {
            let dst = self
                .predicates
                .entry(*id)
                .or_insert_with(|| vec![0.0; g.len()]);
            dst.iter_mut().zip(g).for_each(|(d, s)| *d += s);
        }
    }

    /// Gradient component for an entity coordinate; 0 when untouched.
    /// `component < dim` addresses the real part, the rest the imaginary.
    pub fn entity(&self, id: VocabId, component: usize) -> f64 {
        self.entities.get(&id).map_or(0.0, |g| g[component])
    }

    pub fn phase(&self, id: VocabId, component: usize) -> f64 {
        self.predicates.get(&id).map_or(0.0, |g| g[component])
    }
}

impl RotatEModel {
    /// Seeded initialization: entity components uniform in
    /// `[-γ/d, γ/d] · 0.5`, phases uniform in `[-π, π]`.
    pub fn init(
        num_entities: usize,
        num_predicates: usize,
        dim: usize,
        gamma: f64,
        norm: Norm,
        seed: u64,
    ) -> Self {
        let mut rng = seed::rng(seed, Purpose::Init);
        let bound = 0.5 * gamma / dim as f64;
        let entities = (0..num_entities * 2 * dim)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        let phases = (0..num_predicates * dim)
            .map(|_| rng.gen_range(-PI..=PI))
            .collect();
        Self {
            dim,
            gamma,
            norm,
            entities,
            phases,
        }
    }

    pub fn from_parts(
        dim: usize,
        gamma: f64,
        norm: Norm,
        entities: Vec<f64>,
        phases: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidConfig("dim must be ≥ 1 and gamma > 0".into()));
        }
        if !entities.len().is_multiple_of(2 * dim) || !phases.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(
                "parameter lengths are not multiples of the dimension".into(),
            ));
        }
        if entities.iter().chain(&phases).any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(Self {
            dim,
            gamma,
            norm,
            entities,
            phases,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len() / (2 * self.dim)
    }

    pub fn num_predicates(&self) -> usize {
        self.phases.len() / self.dim
    }

    /// Real and imaginary parts of an entity embedding.
    pub fn entity(&self, id: VocabId) -> (&[f64], &[f64]) {
        let row = &self.entities[id.index() * 2 * self.dim..(id.index() + 1) * 2 * self.dim];
        row.split_at(self.dim)
    }

    pub fn entity_mut(&mut self, id: VocabId) -> (&mut [f64], &mut [f64]) {
        let d = self.dim;
        let row = &mut self.entities[id.index() * 2 * d..(id.index() + 1) * 2 * d];
        row.split_at_mut(d)
    }

    pub fn phases(&self, id: VocabId) -> &[f64] {
        &self.phases[id.index() * self.dim..(id.index() + 1) * self.dim]
    }

    pub fn phases_mut(&mut self, id: VocabId) -> &mut [f64] {
        let d = self.dim;
        &mut self.phases[id.index() * d..(id.index() + 1) * d]
    }

    pub fn check_ids(&self, t: &Triplet) -> Result<()> {
        let ne = self.num_entities();
        for id in [t.head, t.tail] {
            if id.index() >= ne {
                return Err(Error::UnknownId {
                    kind: "entity",
                    id: id.0,
                    size: ne,
                });
            }
        }
        if t.predicate.index() >= self.num_predicates() {
            return Err(Error::UnknownId {
                kind: "predicate",
                id: t.predicate.0,
                size: self.num_predicates(),
            });
        }
        Ok(())
    }

    /// Checks that the model covers exactly the graph's vocabularies.
    pub fn check_vocab(&self, kg: &KnowledgeGraph) -> Result<()> {
        if self.num_entities() != kg.num_entities() || self.num_predicates() != kg.num_predicates()
        {
            return Err(Error::Checkpoint(format!(
                "model has {} entities / {} predicates, graph has {} / {}",
                self.num_entities(),
                self.num_predicates(),
                kg.num_entities(),
                kg.num_predicates()
            )));
        }
        Ok(())
    }

    /// Visits `(a_i, b_i, rot_re_i, rot_im_i)` per coordinate, where
    /// `a + ib = h_i·e^{iθ_i} − t_i`.
    #[inline]
    fn for_each_residual(&self, t: &Triplet, f: impl FnMut(usize, f64, f64, f64, f64)) {
        let theta = self.phases(t.predicate);
        self.residuals_with(t, |i| libm::sincos(theta[i]), f);
    }

    #[inline]
    fn residuals_with(
        &self,
        t: &Triplet,
        sincos: impl Fn(usize) -> (f64, f64),
        mut f: impl FnMut(usize, f64, f64, f64, f64),
    ) {
        let (hr, hi) = self.entity(t.head);
        let (tr, ti) = self.entity(t.tail);
        for i in 0..self.dim {
            let (s, c) = sincos(i);
            let rot_re = hr[i] * c - hi[i] * s;
            let rot_im = hr[i] * s + hi[i] * c;
            f(i, rot_re - tr[i], rot_im - ti[i], rot_re, rot_im);
        }
    }

    /// `(sin θ, cos θ)` for every predicate coordinate, for repeated scoring.
    pub fn rotations(&self) -> Rotations {
        Rotations {
            dim: self.dim,
            sincos: self.phases.iter().map(|&t| libm::sincos(t)).collect(),
        }
    }

    /// Same value as [`RotatEModel::triplet_score`], using a precomputed
    /// rotation table.
    pub fn score_with(&self, rotations: &Rotations, t: &Triplet) -> f64 {
        let base = t.predicate.index() * rotations.dim;
        let table = &rotations.sincos[base..base + self.dim];
        let mut acc = 0.0;
        match self.norm {
            Norm::L1 => {
                self.residuals_with(t, |i| table[i], |_, a, b, _, _| acc += libm::hypot(a, b))
            }
            Norm::L2 => self.residuals_with(t, |i| table[i], |_, a, b, _, _| acc += a * a + b * b),
        }
        let d = match self.norm {
            Norm::L1 => acc,
            Norm::L2 => libm::sqrt(acc),
        };
        self.gamma - d
    }

    pub fn distance(&self, h: VocabId, r: VocabId, t: VocabId) -> f64 {
        self.triplet_distance(&Triplet::new(h, r, t))
    }

    pub fn triplet_distance(&self, t: &Triplet) -> f64 {
        let mut acc = 0.0;
        match self.norm {
            Norm::L1 => self.for_each_residual(t, |_, a, b, _, _| acc += libm::hypot(a, b)),
            Norm::L2 => self.for_each_residual(t, |_, a, b, _, _| acc += a * a + b * b),
        }
        match self.norm {
            Norm::L1 => acc,
            Norm::L2 => libm::sqrt(acc),
        }
    }

    pub fn score(&self, h: VocabId, r: VocabId, t: VocabId) -> f64 {
        self.gamma - self.distance(h, r, t)
    }

    pub fn triplet_score(&self, t: &Triplet) -> f64 {
        self.gamma - self.triplet_distance(t)
    }

    /// `−log σ(s⁺) − Σ (1/k) log σ(−s⁻_i)`.
    pub fn loss(&self, positive: &Triplet, negatives: &[Triplet], negative_weight: f64) -> f64 {
        let mut loss = neg_log_sigmoid(self.triplet_score(positive));
        for neg in negatives {
            loss += neg_log_sigmoid(-self.triplet_score(neg)) / negative_weight;
        }
        loss
    }

    /// Adds `coeff · ∂distance(t)/∂params` into `grad`. Coordinates with zero
    /// modulus (L1) or a zero total distance (L2) contribute the zero
    /// subgradient.
    fn accumulate_distance_grad(&self, t: &Triplet, coeff: f64, grad: &mut Gradient) {
        let d = self.dim;
        let mut partials = vec![(0.0, 0.0, 0.0, 0.0); d];
        match self.norm {
            Norm::L1 => self.for_each_residual(t, |i, a, b, rr, ri| {
                let m = libm::hypot(a, b);
                if m > 0.0 {
                    partials[i] = (a / m, b / m, rr, ri);
                } else {
                    partials[i] = (0.0, 0.0, rr, ri);
                }
            }),
            Norm::L2 => {
                let dist = self.triplet_distance(t);
                self.for_each_residual(t, |i, a, b, rr, ri| {
                    partials[i] = if dist > 0.0 {
                        (a / dist, b / dist, rr, ri)
                    } else {
                        (0.0, 0.0, rr, ri)
                    };
                });
            }
        }
        let theta = self.phases(t.predicate);
        {
            let gh = grad.entity_mut(t.head, d);
            for (i, &(ga, gb, _, _)) in partials.iter().enumerate() {
                let (s, c) = libm::sincos(theta[i]);
                gh[i] += coeff * (ga * c + gb * s);
                gh[d + i] += coeff * (-ga * s + gb * c);
            }
        }
        {
            let gt = grad.entity_mut(t.tail, d);
            for (i, &(ga, gb, _, _)) in partials.iter().enumerate() {
                gt[i] -= coeff * ga;
                gt[d + i] -= coeff * gb;
            }
        }
        let gp = grad.predicate_mut(t.predicate, d);
        for (i, &(ga, gb, rr, ri)) in partials.iter().enumerate() {
            gp[i] += coeff * (-ga * ri + gb * rr);
        }
    }

    /// Loss and its analytic gradient for one positive and its negatives.
    pub fn gradients(
        &self,
        positive: &Triplet,
        negatives: &[Triplet],
        negative_weight: f64,
    ) -> (f64, Gradient) {
        let mut grad = Gradient::default();
        let s_pos = self.triplet_score(positive);
        let mut loss = neg_log_sigmoid(s_pos);
        // ∂L/∂d⁺ = σ(−s⁺)
        self.accumulate_distance_grad(positive, sigmoid(-s_pos), &mut grad);
        for neg in negatives {
            let s_neg = self.triplet_score(neg);
            loss += neg_log_sigmoid(-s_neg) / negative_weight;
            // ∂L/∂d⁻ = −σ(s⁻)/k
            self.accumulate_distance_grad(neg, -sigmoid(s_neg) / negative_weight, &mut grad);
        }
        (loss, grad)
    }

    /// `params −= step · grad`.
    pub fn apply(&mut self, grad: &Gradient, step: f64) {
        let d = self.dim;
        for (id, g) in &grad.entities {
            let row = &mut self.entities[id.index() * 2 * d..(id.index() + 1) * 2 * d];
            row.iter_mut().zip(g).for_each(|(p, g)| *p -= step * g);
        }
        for (id, g) in &grad.predicates {
            let row = self.phases_mut(*id);
            row.iter_mut().zip(g).for_each(|(p, g)| *p -= step * g);
        }
    }

    /// Text checkpoint. Reals are written with 17 significant digits, which
    /// round-trips every finite `f64` exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rotate v1");
        let _ = writeln!(out, "dim={}", self.dim);
        let _ = writeln!(out, "gamma={:.16e}", self.gamma);
        let _ = writeln!(out, "entities={}", self.num_entities());
        let _ = writeln!(out, "predicates={}", self.num_predicates());
        let _ = writeln!(out, "norm={}", self.norm.as_str());
        let write_rows = |out: &mut String, values: &[f64], width: usize| {
            for row in values.chunks(width) {
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{v:.16e}");
                }
                out.push('\n');
            }
        };
        write_rows(&mut out, &self.entities, 2 * self.dim);
        write_rows(&mut out, &self.phases, self.dim);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Checkpoint(msg);
        let mut lines = text.lines();
        match lines.next() {
            Some("rotate v1") => {}
            Some(other) => return Err(bad(format!("unsupported header `{other}`"))),
            None => return Err(bad("empty checkpoint".into())),
        }
        let mut header = BTreeMap::new();
        let mut rows = Vec::new();
        for line in lines {
            if rows.is_empty() {
                if let Some((k, v)) = line.split_once('=') {
                    header.insert(k.trim(), v.trim());
                    continue;
                }
            }
            rows.push(line);
        }
        let field = |key: &str| -> Result<&str> {
            header
                .get(key)
                .copied()
                .ok_or_else(|| bad(format!("missing `{key}`")))
        };
        let int = |key: &str| -> Result<usize> {
            field(key)?
                .parse()
                .map_err(|_| bad(format!("`{key}` is not an integer")))
        };
        let dim = int("dim")?;
        let ne = int("entities")?;
        let np = int("predicates")?;
        let gamma: f64 = field("gamma")?
            .parse()
            .map_err(|_| bad("`gamma` is not a number".into()))?;
        let norm = match header.get("norm") {
            None => Norm::L1,
            Some(s) => Norm::parse(s).ok_or_else(|| bad(format!("unknown norm `{s}`")))?,
        };
        if dim == 0 {
            return Err(bad("dim must be positive".into()));
        }
        if rows.len() != ne + np {
            return Err(bad(format!(
                "expected {} parameter rows, found {}",
                ne + np,
                rows.len()
            )));
        }
        let parse_row = |i: usize, row: &str, width: usize, out: &mut Vec<f64>| -> Result<()> {
            let before = out.len();
            for tok in row.split_whitespace() {
                out.push(
                    tok.parse()
                        .map_err(|_| bad(format!("row {i}: bad number `{tok}`")))?,
                );
            }
            if out.len() - before != width {
                return Err(bad(format!(
                    "row {i}: expected {width} values, found {}",
                    out.len() - before
                )));
            }
            Ok(())
        };
        let mut entities = Vec::with_capacity(ne * 2 * dim);
        let mut phases = Vec::with_capacity(np * dim);
        for (i, row) in rows.iter().enumerate() {
            if i < ne {
                parse_row(i, row, 2 * dim, &mut entities)?;
            } else {
                parse_row(i, row, dim, &mut phases)?;
            }
        }
        Self::from_parts(dim, gamma, norm, entities, phases)
    }
}

const MAX_RESAMPLE: usize = 100;

/// Corrupts one side of a positive with a uniformly random entity,
/// resampling (up to a bound) while the corruption is a known train triplet.
pub fn corrupt<R: Rng>(
    rng: &mut R,
    positive: &Triplet,
    num_entities: usize,
    kg: &KnowledgeGraph,
) -> Triplet {
    let mut candidate = *positive;
    for _ in 0..MAX_RESAMPLE {
        let e = VocabId(rng.gen_range(0..num_entities as u32));
        candidate = if rng.gen_bool(0.5) {
            Triplet::new(e, positive.predicate, positive.tail)
        } else {
            Triplet::new(positive.head, positive.predicate, e)
        };
        if !kg.contains(&candidate, SplitScope::TRAIN) {
            break;
        }
    }
    candidate
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-positive loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.epoch_losses.iter().enumerate() {
            let _ = writeln!(out, "epoch.{}.loss={:.12}", i + 1, l);
        }
        out
    }
}

/// Mini-batch SGD on the train split.
///
/// Per-example gradients are computed through `exec` and summed in example
/// order, so the result is bit-identical for any executor.
pub fn train<E: Executor>(
    kg: &KnowledgeGraph,
    config: &TrainConfig,
    exec: &E,
) -> Result<(RotatEModel, TrainReport)> {
    config.validate()?;
    let train: Vec<Triplet> = kg.iter_scope(SplitScope::TRAIN).collect();
    if train.is_empty() {
        return Err(Error::EmptyTrainSplit);
    }
    let mut model = RotatEModel::init(
        kg.num_entities(),
        kg.num_predicates(),
        config.dim,
        config.gamma,
        config.norm,
        config.seed,
    );
    let mut rng = seed::rng(config.seed, Purpose::Negatives);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut report = TrainReport::default();
    let n_neg = config.negatives;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let mut negatives = Vec::with_capacity(chunk.len() * n_neg);
            for &i in chunk {
                for _ in 0..n_neg {
                    negatives.push(corrupt(&mut rng, &train[i], kg.num_entities(), kg));
                }
            }
            let current = &model;
            let results = exec.map_range(0..chunk.len(), |j| {
                current.gradients(
                    &train[chunk[j]],
                    &negatives[j * n_neg..(j + 1) * n_neg],
                    config.negative_weight,
                )
            });
            let mut total = Gradient::default();
            for (loss, g) in &results {
                epoch_loss += loss;
                total.add(g);
            }
            model.apply(&total, config.learning_rate / chunk.len() as f64);
        }
        report.epoch_losses.push(epoch_loss / train.len() as f64);
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::kg::Vocabulary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model_1d(h: (f64, f64), theta: f64, t: (f64, f64)) -> RotatEModel {
        RotatEModel::from_parts(1, 12.0, Norm::L1, vec![h.0, h.1, t.0, t.1], vec![theta]).unwrap()
    }

    #[test]
    fn identity_rotation_zero_distance() {
        let m = model_1d((0.3, -0.7), 0.0, (0.3, -0.7));
        assert_eq!(m.distance(VocabId(0), VocabId(0), VocabId(1)), 0.0);
        assert_eq!(m.score(VocabId(0), VocabId(0), VocabId(1)), 12.0);
    }

    #[test]
    fn half_turn_distance() {
        let m = model_1d((1.0, 0.0), PI, (1.0, 0.0));
        let d = m.distance(VocabId(0), VocabId(0), VocabId(1));
        assert!((d - 2.0).abs() < 1e-15);
        assert!((m.score(VocabId(0), VocabId(0), VocabId(1)) - 10.0).abs() < 1e-15);
    }

    #[test]
    fn loss_at_zero_scores() {
        // γ = d gives s = 0 for both triplets.
        let m = RotatEModel::from_parts(1, 2.0, Norm::L1, vec![1.0, 0.0, -1.0, 0.0], vec![0.0])
            .unwrap();
        let t = Triplet::new(VocabId(0), VocabId(0), VocabId(1));
        assert!((m.triplet_score(&t)).abs() < 1e-15);
        let l = m.loss(&t, &[t], 1.0);
        assert!((l - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn loss_limits() {
        assert!(neg_log_sigmoid(800.0) < 1e-300);
        assert!(neg_log_sigmoid(-800.0).is_finite());
        assert!((neg_log_sigmoid(-800.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn locality_of_gradient() {
        let m = RotatEModel::init(5, 3, 4, 12.0, Norm::L1, 3);
        let pos = Triplet::new(VocabId(0), VocabId(1), VocabId(2));
        let neg = Triplet::new(VocabId(0), VocabId(1), VocabId(3));
        let (_, g) = m.gradients(&pos, &[neg], 1.0);
        assert!(!g.entities.contains_key(&VocabId(4)));
        assert!(!g.predicates.contains_key(&VocabId(0)));
        assert_eq!(g.entity(VocabId(4), 0), 0.0);
    }

    #[test]
    fn zero_modulus_subgradient() {
        let m = model_1d((0.5, 0.5), 0.0, (0.5, 0.5));
        let t = Triplet::new(VocabId(0), VocabId(0), VocabId(1));
        let (_, g) = m.gradients(&t, &[], 1.0);
        for c in 0..2 {
            assert_eq!(g.entity(VocabId(0), c), 0.0);
            assert_eq!(g.entity(VocabId(1), c), 0.0);
        }
        assert_eq!(g.phase(VocabId(0), 0), 0.0);
    }

    #[test]
    fn rotation_preserves_norm() {
        let m = RotatEModel::init(4, 2, 16, 12.0, Norm::L2, 9);
        for h in 0..4 {
            for r in 0..2 {
                let (hr, hi) = m.entity(VocabId(h));
                let theta = m.phases(VocabId(r));
                let mut before = 0.0;
                let mut after = 0.0;
                for i in 0..16 {
                    before += hr[i] * hr[i] + hi[i] * hi[i];
                    let (s, c) = libm::sincos(theta[i]);
                    let (a, b) = (hr[i] * c - hi[i] * s, hr[i] * s + hi[i] * c);
                    after += a * a + b * b;
                    assert!((libm::hypot(c, s) - 1.0).abs() <= 1e-12);
                }
                assert!((before.sqrt() - after.sqrt()).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn init_bounds() {
        let m = RotatEModel::init(10, 3, 8, 12.0, Norm::L1, 1);
        let bound = 0.5 * 12.0 / 8.0;
        assert!(m.entities.iter().all(|x| x.abs() <= bound));
        assert!(m.phases.iter().all(|x| x.abs() <= PI));
    }

    #[test]
    fn checkpoint_round_trip_and_errors() {
        let m = RotatEModel::init(7, 3, 5, 9.5, Norm::L2, 11);
        let text = m.to_text();
        let back = RotatEModel::from_text(&text).unwrap();
        assert_eq!(back, m);

        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(RotatEModel::from_text(&truncated).is_err());
        assert!(RotatEModel::from_text(&text.replace("rotate v1", "rotate v2")).is_err());
        assert!(RotatEModel::from_text(&text.replace("dim=5", "dim=4")).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = TrainConfig {
            negatives: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        assert!(TrainConfig::default().validate().is_ok());
    }

    fn ring(n: usize) -> KnowledgeGraph {
        let e = Vocabulary::from_labels("entity", (0..n).map(|i| format!("e{i}"))).unwrap();
        let p = Vocabulary::from_labels("predicate", ["next"]).unwrap();
        let ts = (0..n)
            .map(|i| Triplet::new(VocabId(i as u32), VocabId(0), VocabId(((i + 1) % n) as u32)));
        KnowledgeGraph::from_triplets(e, p, ts).unwrap()
    }

    #[test]
    fn training_is_deterministic_and_rejects_empty() {
        let kg = ring(12);
        let cfg = TrainConfig {
            dim: 4,
            epochs: 3,
            batch_size: 5,
            negatives: 2,
            negative_weight: 2.0,
            ..TrainConfig::default()
        };
        let (a, ra) = train(&kg, &cfg, &Sequential).unwrap();
        let (b, rb) = train(&kg, &cfg, &Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);

        let empty = kg
            .clone()
            .with_splits(vec![crate::kg::Split::Test; 12])
            .unwrap();
        assert_eq!(
            train(&empty, &cfg, &Sequential).unwrap_err(),
            Error::EmptyTrainSplit
        );
    }

    #[test]
    fn corruption_avoids_train_triplets() {
        let kg = ring(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in kg.triplets() {
            for _ in 0..20 {
                let c = corrupt(&mut rng, t, 6, &kg);
                assert!(!kg.contains(&c, SplitScope::TRAIN));
                assert!(c.head == t.head || c.tail == t.tail);
            }
        }
    }
}
