//! Markov chains on groups: simple random walks, transition tables and
//! push-forwards, with sampling and empirical tameness diagnostics.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupModel, NormalForm};
use crate::rng::trial_rng;
use crate::word::Word;

/// Tolerance on the total mass of a kernel row.
pub const ROW_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// Verdict threshold on the fitted return rate.
pub const NON_AMENABLE_RHO: f64 = 0.95;

/// Chain selection as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChainSpec {
    Srw,
    LazySrw { laziness: f64 },
    Table { table_path: String },
}

/// Transition table file: rows keyed by state word, steps as
/// `[word, probability]` pairs applied on the right. States missing from
/// `rows` use `default`, which makes the chain quasi-homogeneous outside
/// the table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    #[serde(default)]
    pub rows: BTreeMap<String, Vec<(String, f64)>>,
    pub default: Vec<(String, f64)>,
}

/// Right-multiplication steps with their probabilities.
#[derive(Clone, Debug)]
struct StepLaw {
    steps: Vec<Word>,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl StepLaw {
    fn new(pairs: Vec<(Word, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("empty kernel row".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if pairs.iter().any(|p| !p.1.is_finite() || p.1 < 0.0) || (total - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::InvalidInput(format!("kernel row sums to {total}, not 1")));
        }
        let (steps, probs): (Vec<Word>, Vec<f64>) = pairs.into_iter().unzip();
        let sampler = WeightedIndex::new(&probs).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(StepLaw { steps, probs, sampler })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &Word {
        &self.steps[self.sampler.sample(rng)]
    }

    fn pairs(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.steps.iter().zip(self.probs.iter().copied())
    }
}

/// A bijection of the group, used to push chains forward.
pub trait Bijection: Send + Sync {
    fn apply(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm>;
    fn apply_inverse(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm>;
    fn name(&self) -> String;
}

pub struct Identity;

impl Bijection for Identity {
    fn apply(&self, _: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        Ok(g.clone())
    }

    fn apply_inverse(&self, _: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        Ok(g.clone())
    }

    fn name(&self) -> String {
        "identity".into()
    }
}

/// `g -> h g`.
pub struct LeftTranslation {
    pub by: NormalForm,
}

impl Bijection for LeftTranslation {
    fn apply(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        model.multiply(&self.by, g)
    }

    fn apply_inverse(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        model.multiply(&model.inverse(&self.by)?, g)
    }

    fn name(&self) -> String {
        format!("left-translation({})", self.by.word())
    }
}

/// An automorphism given by the images of the generators.
pub struct Automorphism {
    images: Vec<Word>,
    inverse_images: Vec<Word>,
    label: String,
}

impl Automorphism {
    /// The caller guarantees that the two substitutions are mutually
    /// inverse automorphisms.
    pub fn new(images: Vec<Word>, inverse_images: Vec<Word>, label: impl Into<String>) -> Self {
        Automorphism {
            images,
            inverse_images,
            label: label.into(),
        }
    }

    /// Exchanges generators `i` and `j`. This is an automorphism whenever
    /// the relator set is invariant under the exchange (always for free
    /// groups).
    pub fn generator_swap(model: &GroupModel, i: usize, j: usize) -> Self {
        let mut images: Vec<Word> = (0..model.rank()).map(|g| Word(vec![crate::Letter::gen(g as u8)])).collect();
        images.swap(i, j);
        let symbols = &model.presentation().generators;
        Automorphism::new(images.clone(), images, format!("swap({},{})", symbols[i], symbols[j]))
    }

    fn substitute(model: &GroupModel, images: &[Word], g: &NormalForm) -> Result<NormalForm> {
        let mut out = Word::empty();
        for l in g.word().letters() {
            let img = &images[l.generator()];
            if l.is_inverse() {
                out.0.extend(img.invert().0);
            } else {
                out.0.extend_from_slice(&img.0);
            }
        }
        model.evaluate(&out)
    }
}

impl Bijection for Automorphism {
    fn apply(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        Automorphism::substitute(model, &self.images, g)
    }

    fn apply_inverse(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        Automorphism::substitute(model, &self.inverse_images, g)
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

/// The inverse of a bijection.
pub struct Inverse(pub Arc<dyn Bijection>);

impl Bijection for Inverse {
    fn apply(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        self.0.apply_inverse(model, g)
    }

    fn apply_inverse(&self, model: &GroupModel, g: &NormalForm) -> Result<NormalForm> {
        self.0.apply(model, g)
    }

    fn name(&self) -> String {
        format!("inverse({})", self.0.name())
    }
}

#[derive(Clone)]
enum Kernel<'m> {
    /// Translation invariant: the same step law at every state.
    Steps(StepLaw),
    Table {
        rows: FxHashMap<NormalForm, StepLaw>,
        default: StepLaw,
    },
    PushForward {
        base: Box<Chain<'m>>,
        f: Arc<dyn Bijection + 'm>,
    },
}

/// A bounded-jump Markov chain on the group of a model.
#[derive(Clone)]
pub struct Chain<'m> {
    model: &'m GroupModel,
    kernel: Kernel<'m>,
    jump_bound: usize,
    descriptor: String,
}

impl<'m> Chain<'m> {
    /// Uniform steps over the generators and their inverses.
    pub fn srw(model: &'m GroupModel) -> Self {
        let alphabet = model.alphabet();
        let p = 1.0 / alphabet.len() as f64;
        let pairs = alphabet.into_iter().map(|l| (Word(vec![l]), p)).collect();
        let mut c = Chain::steps(model, pairs).expect("uniform law is valid");
        c.descriptor = "srw".into();
        c
    }

    /// Stays put with probability `laziness`, otherwise a simple random
    /// walk step.
    pub fn lazy_srw(model: &'m GroupModel, laziness: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&laziness) {
            return Err(Error::InvalidInput(format!("laziness {laziness} outside [0, 1)")));
        }
        let alphabet = model.alphabet();
        let p = (1.0 - laziness) / alphabet.len() as f64;
        let mut pairs = vec![(Word::empty(), laziness)];
        pairs.extend(alphabet.into_iter().map(|l| (Word(vec![l]), p)));
        let mut c = Chain::steps(model, pairs)?;
        c.descriptor = format!("lazy-srw({laziness})");
        Ok(c)
    }

    /// A translation-invariant chain with the given right-multiplication
    /// step law.
    pub fn steps(model: &'m GroupModel, pairs: Vec<(Word, f64)>) -> Result<Self> {
        let law = StepLaw::new(pairs)?;
        let jump_bound = law_jump(model, &law)?;
        Ok(Chain {
            model,
            kernel: Kernel::Steps(law),
            jump_bound,
            descriptor: "steps".into(),
        })
    }

    /// Explicit rows on finitely many states and a default law elsewhere.
    pub fn table(
        model: &'m GroupModel,
        rows: Vec<(NormalForm, Vec<(Word, f64)>)>,
        default: Vec<(Word, f64)>,
    ) -> Result<Self> {
        let default = StepLaw::new(default)?;
        let mut jump_bound = law_jump(model, &default)?;
        let mut map = FxHashMap::default();
        for (state, pairs) in rows {
            let law = StepLaw::new(pairs)?;
            jump_bound = jump_bound.max(law_jump(model, &law)?);
            map.insert(state, law);
        }
        Ok(Chain {
            model,
            kernel: Kernel::Table { rows: map, default },
            jump_bound,
            descriptor: "table".into(),
        })
    }

    pub fn from_table_spec(model: &'m GroupModel, spec: &TableSpec) -> Result<Self> {
        let parse_row = |row: &[(String, f64)]| -> Result<Vec<(Word, f64)>> {
            row.iter().map(|(w, p)| Ok((model.parse_word(w)?, *p))).collect()
        };
        let mut rows = Vec::new();
        for (state, row) in &spec.rows {
            rows.push((model.evaluate(&model.parse_word(state)?)?, parse_row(row)?));
        }
        Chain::table(model, rows, parse_row(&spec.default)?)
    }

    pub fn from_spec(model: &'m GroupModel, spec: &ChainSpec) -> Result<Self> {
        match spec {
            ChainSpec::Srw => Ok(Chain::srw(model)),
            ChainSpec::LazySrw { laziness } => Chain::lazy_srw(model, *laziness),
            ChainSpec::Table { table_path } => {
                let text = std::fs::read_to_string(table_path)?;
                let spec: TableSpec = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidInput(format!("chain.table_path: {e}")))?;
                Chain::from_table_spec(model, &spec)
            }
        }
    }

    /// The push-forward `f_#` of this chain: the mass of `g -> h` is the
    /// original mass of `f^-1(g) -> f^-1(h)`. The new jump bound is
    /// measured on the ball of radius `check_radius` and must not exceed
    /// `cap`.
    pub fn push_forward(&self, f: Arc<dyn Bijection + 'm>, check_radius: usize, cap: usize) -> Result<Chain<'m>> {
        let mut chain = Chain {
            model: self.model,
            kernel: Kernel::PushForward {
                base: Box::new(self.clone()),
                f: f.clone(),
            },
            jump_bound: 0,
            descriptor: format!("push-forward({}, {})", f.name(), self.descriptor),
        };
        let mut observed = 0;
        for e in self.model.ball(check_radius)?.entries() {
            for (h, _) in chain.transitions(&e.element)? {
                observed = observed.max(self.model.distance(&e.element, &h)?);
            }
        }
        if observed > cap {
            return Err(Error::JumpBoundBlowup { observed, cap });
        }
        chain.jump_bound = observed;
        Ok(chain)
    }

    pub fn model(&self) -> &'m GroupModel {
        self.model
    }

    /// Jump bound `K`: every transition moves at most this far.
    pub fn jump_bound(&self) -> usize {
        self.jump_bound
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Whether the step law is the same at every state.
    pub fn is_translation_invariant(&self) -> bool {
        matches!(self.kernel, Kernel::Steps(_))
    }

    /// The step law of a translation-invariant chain.
    pub fn step_law(&self) -> Option<Vec<(Word, f64)>> {
        match &self.kernel {
            Kernel::Steps(law) => Some(law.pairs().map(|(w, p)| (w.clone(), p)).collect()),
            _ => None,
        }
    }

    /// The kernel row at `state`, merged by target element.
    pub fn transitions(&self, state: &NormalForm) -> Result<Vec<(NormalForm, f64)>> {
        let mut out: Vec<(NormalForm, f64)> = Vec::new();
        let mut add = |g: NormalForm, p: f64| match out.iter_mut().find(|(h, _)| *h == g) {
            Some(slot) => slot.1 += p,
            None => out.push((g, p)),
        };
        match &self.kernel {
            Kernel::Steps(law) => {
                for (s, p) in law.pairs() {
                    add(self.model.evaluate(&state.word().concat(s))?, p);
                }
            }
            Kernel::Table { rows, default } => {
                let law = rows.get(state).unwrap_or(default);
                for (s, p) in law.pairs() {
                    add(self.model.evaluate(&state.word().concat(s))?, p);
                }
            }
            Kernel::PushForward { base, f } => {
                let pre = f.apply_inverse(self.model, state)?;
                for (h, p) in base.transitions(&pre)? {
                    add(f.apply(self.model, &h)?, p);
                }
            }
        }
        Ok(out)
    }

    /// One step from `state`: the increment word and the new state.
    fn step<R: Rng>(&self, state: &NormalForm, rng: &mut R) -> Result<(Word, NormalForm)> {
        let law = match &self.kernel {
            Kernel::Steps(law) => law,
            Kernel::Table { rows, default } => rows.get(state).unwrap_or(default),
            Kernel::PushForward { .. } => {
                let row = self.transitions(state)?;
                let weights: Vec<f64> = row.iter().map(|r| r.1).collect();
                let idx = WeightedIndex::new(&weights)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?
                    .sample(rng);
                let next = row[idx].0.clone();
                let inc = self.model.multiply(&self.model.inverse(state)?, &next)?;
                return Ok((inc.into_word(), next));
            }
        };
        let s = law.sample(rng).clone();
        let next = self.model.evaluate(&state.word().concat(&s))?;
        Ok((s, next))
    }

    /// A trajectory of `n` steps from `o`, determined by
    /// `(master_seed, trial_index)`.
    pub fn sample_path(&self, o: &NormalForm, n: usize, master_seed: u64, trial_index: u64) -> Result<PathSample> {
        let mut rng = trial_rng(master_seed, trial_index);
        let mut steps = Vec::with_capacity(n);
        if let Kernel::Steps(law) = &self.kernel {
            for _ in 0..n {
                steps.push(law.sample(&mut rng).clone());
            }
        } else {
            let mut state = o.clone();
            for _ in 0..n {
                let (s, next) = self.step(&state, &mut rng)?;
                steps.push(s);
                state = next;
            }
        }
        Ok(PathSample {
            basepoint: o.clone(),
            steps,
            master_seed,
            trial_index,
        })
    }
}

fn law_jump(model: &GroupModel, law: &StepLaw) -> Result<usize> {
    let mut k = 0;
    for s in &law.steps {
        k = k.max(model.evaluate(s)?.len());
    }
    Ok(k)
}

/// A sampled trajectory `x_0 = o, x_1, ..., x_n`, stored as the basepoint
/// and the increment words `x_i^-1 x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub basepoint: NormalForm,
    pub steps: Vec<Word>,
    pub master_seed: u64,
    pub trial_index: u64,
}

impl PathSample {
    /// A path given directly by its increments.
    pub fn from_steps(basepoint: NormalForm, steps: Vec<Word>) -> Self {
        PathSample {
            basepoint,
            steps,
            master_seed: 0,
            trial_index: 0,
        }
    }

    /// Number of steps.
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn positions(&self, model: &GroupModel) -> Result<Vec<NormalForm>> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.basepoint.clone());
        for s in &self.steps {
            let last = out.last().expect("nonempty");
            out.push(model.evaluate(&last.word().concat(s))?);
        }
        Ok(out)
    }

    /// The product of the increments, `x_0^-1 x_n`.
    pub fn displacement(&self, model: &GroupModel) -> Result<NormalForm> {
        model.evaluate(&self.steps.iter().fold(Word::empty(), |acc, s| acc.concat(s).free_reduce()))
    }

    /// `d_S(x_0, x_k)` for every `k`.
    pub fn distances_from_start(&self, model: &GroupModel) -> Result<Vec<usize>> {
        let mut r = model.reducer();
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(0);
        for s in &self.steps {
            r.push_word_back(s);
            out.push(r.len()?);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum TamenessMethod {
    ExactConvolution,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonal {
    pub target: String,
    pub rho_sup: f64,
    pub rho_fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reach {
    pub letter: String,
    /// Smallest `k` with `P[w_k = s] > 0`, if within the cap.
    pub steps: Option<usize>,
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamenessVerdict {
    pub bounded_jumps: bool,
    pub non_amenable: bool,
    pub irreducible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamenessReport {
    pub method: TamenessMethod,
    pub n_max: usize,
    pub jump_bound: usize,
    /// `P[w_n = o]` for `n = 0..=n_max`, `o` the identity.
    pub return_probabilities: Vec<f64>,
    /// `max_n P_n^(1/n)`.
    pub rho_sup: f64,
    /// Fitted decay rate, see [`fit_return_rate`].
    pub rho_fit: f64,
    /// `max_n P_n / rho_fit^n`.
    pub a_hat: f64,
    pub off_diagonal: Vec<OffDiagonal>,
    pub irreducibility: Vec<Reach>,
    pub verdict: TamenessVerdict,
}

/// Fits `log P_n = c + n log(rho) + beta log(n)` by least squares on the
/// nonzero `P_n` with `n` in the upper half of the range. The polynomial
/// correction absorbs the `n^(-3/2)` prefactor of return probabilities, so
/// `rho` converges much faster than `P_n^(1/n)`. Falls back to the maximum of
/// `P_n^(1/n)` when fewer than three points are available.
pub fn fit_return_rate(probs: &[f64]) -> f64 {
    let n_max = probs.len().saturating_sub(1);
    let rho_sup = sup_rate(probs);
    let pts: Vec<(f64, f64)> = (n_max.div_ceil(2).max(1)..=n_max)
        .filter(|&n| probs[n] > 0.0)
        .map(|n| (n as f64, probs[n].ln()))
        .collect();
    if pts.len() < 3 {
        return rho_sup;
    }
    let rows: Vec<[f64; 3]> = pts.iter().map(|&(n, _)| [1.0, n, n.ln()]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    match crate::lab::least_squares(&rows, &ys) {
        Some(beta) => beta[1].exp().min(1.0),
        None => rho_sup,
    }
}

fn sup_rate(probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| p.powf(1.0 / n as f64))
        .fold(0.0, f64::max)
}

impl Chain<'_> {
    /// Measures the clauses of tameness: jump bound, decay of return
    /// probabilities (diagonal plus ten off-diagonal targets) and
    /// reachability of every generator within `reach_cap` steps.
    pub fn check_tameness(&self, n_max: usize, method: TamenessMethod, reach_cap: usize) -> Result<TamenessReport> {
        let model = self.model;
        let targets = off_diagonal_targets(model, 10)?;
        let (diag, off) = match method {
            TamenessMethod::ExactConvolution => self.exact_hits(n_max, &targets)?,
            TamenessMethod::MonteCarlo { trials, seed } => self.monte_carlo_hits(n_max, &targets, trials, seed)?,
        };
        let rho_sup = sup_rate(&diag);
        let rho_fit = fit_return_rate(&diag);
        let a_hat = diag
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0 && rho_fit > 0.0)
            .map(|(n, &p)| p / rho_fit.powi(n as i32))
            .fold(0.0, f64::max);
        let off_diagonal: Vec<OffDiagonal> = targets
            .iter()
            .zip(&off)
            .map(|(t, probs)| OffDiagonal {
                target: model.format_word(t.word()),
                rho_sup: sup_rate(probs),
                rho_fit: fit_return_rate(probs),
            })
            .collect();
        let irreducibility = self.reachability(reach_cap)?;
        let verdict = TamenessVerdict {
            bounded_jumps: self.jump_bound > 0,
            non_amenable: rho_fit < NON_AMENABLE_RHO && off_diagonal.iter().all(|o| o.rho_fit < NON_AMENABLE_RHO),
            irreducible: irreducibility.iter().all(|r| r.steps.is_some()),
        };
        Ok(TamenessReport {
            method,
            n_max,
            jump_bound: self.jump_bound,
            return_probabilities: diag,
            rho_sup,
            rho_fit,
            a_hat,
            off_diagonal,
            irreducibility,
            verdict,
        })
    }

    /// Exact `P[w_n = identity]` and `P[w_n = t]` for each target.
    fn exact_hits(&self, n_max: usize, targets: &[NormalForm]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if let Some((stay, each)) = self.radial_free_law() {
            return Ok(self.radial_hits(n_max, targets, stay, each));
        }
        let reach = targets.iter().map(|t| t.len()).max().unwrap_or(0);
        let mut diag = vec![1.0];
        let mut off: Vec<Vec<f64>> = targets.iter().map(|_| vec![0.0]).collect();
        let mut dist: FxHashMap<NormalForm, f64> = FxHashMap::default();
        dist.insert(NormalForm::identity(), 1.0);
        for t in 1..=n_max {
            let keep = (n_max - t) * self.jump_bound + reach;
            dist = self.convolve(&dist, keep)?;
            diag.push(dist.get(&NormalForm::identity()).copied().unwrap_or(0.0));
            for (o, target) in off.iter_mut().zip(targets) {
                o.push(dist.get(target).copied().unwrap_or(0.0));
            }
        }
        Ok((diag, off))
    }

    /// One step of the exact distribution, dropping states farther than
    /// `keep` from the identity.
    fn convolve(&self, dist: &FxHashMap<NormalForm, f64>, keep: usize) -> Result<FxHashMap<NormalForm, f64>> {
        let mut next: FxHashMap<NormalForm, f64> = FxHashMap::default();
        let mut states: Vec<(&NormalForm, &f64)> = dist.iter().collect();
        states.sort_by(|a, b| a.0.cmp(b.0));
        for (g, &p) in states {
            for (h, q) in self.transitions(g)? {
                if h.len() <= keep {
                    *next.entry(h).or_insert(0.0) += p * q;
                }
            }
        }
        if next.len() > crate::model::DEFAULT_BALL_BUDGET {
            return Err(Error::BudgetExceeded(format!("{} states in exact convolution", next.len())));
        }
        Ok(next)
    }

    /// For a free group walk that stays with probability `stay` and takes
    /// each letter with probability `each`, the distance to the identity is
    /// itself a birth-death chain.
    fn radial_free_law(&self) -> Option<(f64, f64)> {
        if !matches!(self.model.family(), crate::model::Family::Free { .. }) {
            return None;
        }
        let Kernel::Steps(law) = &self.kernel else { return None };
        let alphabet = self.model.alphabet();
        let mut stay = 0.0;
        let mut each: Option<f64> = None;
        let mut seen = vec![false; alphabet.len()];
        for (s, p) in law.pairs() {
            match s.len() {
                0 => stay += p,
                1 => {
                    let i = alphabet.iter().position(|l| *l == s.0[0])?;
                    if seen[i] || each.is_some_and(|e| (e - p).abs() > ROW_TOLERANCE) {
                        return None;
                    }
                    seen[i] = true;
                    each = Some(p);
                }
                _ => return None,
            }
        }
        if !seen.iter().all(|&s| s) {
            return None;
        }
        Some((stay, each?))
    }

    fn radial_hits(&self, n_max: usize, targets: &[NormalForm], stay: f64, each: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k2 = self.model.alphabet().len() as f64;
        let mut mass = vec![0.0; n_max + 2];
        mass[0] = 1.0;
        let mut diag = vec![1.0];
        let mut off: Vec<Vec<f64>> = targets.iter().map(|_| vec![0.0]).collect();
        // sphere sizes 2k (2k-1)^(r-1)
        let sphere = |r: usize| if r == 0 { 1.0 } else { k2 * (k2 - 1.0).powi(r as i32 - 1) };
        for t in 1..=n_max {
            let mut next = vec![0.0; n_max + 2];
            for r in 0..=t.min(n_max) {
                let m = mass[r];
                if m == 0.0 {
                    continue;
                }
                next[r] += stay * m;
                if r == 0 {
                    next[1] += k2 * each * m;
                } else {
                    next[r + 1] += (k2 - 1.0) * each * m;
                    next[r - 1] += each * m;
                }
            }
            mass = next;
            diag.push(mass[0]);
            for (o, target) in off.iter_mut().zip(targets) {
                let r = target.len();
                o.push(if r <= n_max { mass[r] / sphere(r) } else { 0.0 });
            }
        }
        (diag, off)
    }

    fn monte_carlo_hits(
        &self,
        n_max: usize,
        targets: &[NormalForm],
        trials: usize,
        seed: u64,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        let counts: Vec<Vec<Vec<u32>>> = (0..trials as u64)
            .into_par_iter()
            .map(|trial| {
                let path = self.sample_path(&NormalForm::identity(), n_max, seed, trial)?;
                let mut reducers: Vec<_> = std::iter::once(NormalForm::identity())
                    .chain(targets.iter().cloned())
                    .map(|t| {
                        let mut r = self.model.reducer();
                        r.push_word_back(&t.word().invert());
                        r
                    })
                    .collect();
                let mut hits = vec![vec![0u32; n_max + 1]; reducers.len()];
                for (i, h) in hits.iter_mut().enumerate() {
                    h[0] = u32::from(reducers[i].is_empty()?);
                }
                for (n, s) in path.steps.iter().enumerate() {
                    for (i, r) in reducers.iter_mut().enumerate() {
                        r.push_word_back(s);
                        hits[i][n + 1] = u32::from(r.is_empty()?);
                    }
                }
                Ok(hits)
            })
            .collect::<Result<_>>()?;
        let mut freq = vec![vec![0.0; n_max + 1]; targets.len() + 1];
        for hits in &counts {
            for (f, h) in freq.iter_mut().zip(hits) {
                for (x, &c) in f.iter_mut().zip(h) {
                    *x += c as f64;
                }
            }
        }
        for f in &mut freq {
            f.iter_mut().for_each(|x| *x /= trials as f64);
        }
        let diag = freq.remove(0);
        Ok((diag, freq))
    }

    /// For every letter `s`, the least `k <= cap` with `P[w_k = s] > 0`.
    fn reachability(&self, cap: usize) -> Result<Vec<Reach>> {
        let model = self.model;
        let letters: Vec<NormalForm> = model
            .alphabet()
            .into_iter()
            .map(|l| model.evaluate(&Word(vec![l])))
            .collect::<Result<_>>()?;
        let mut found: Vec<Option<(usize, f64)>> = vec![None; letters.len()];
        let mut dist: FxHashMap<NormalForm, f64> = FxHashMap::default();
        dist.insert(NormalForm::identity(), 1.0);
        for k in 1..=cap {
            if found.iter().all(|f| f.is_some()) {
                break;
            }
            dist = self.convolve(&dist, (cap - k) * self.jump_bound + 1)?;
            for (slot, s) in found.iter_mut().zip(&letters) {
                if slot.is_none() {
                    if let Some(&p) = dist.get(s).filter(|&&p| p > 0.0) {
                        *slot = Some((k, p));
                    }
                }
            }
        }
        Ok(letters
            .iter()
            .zip(found)
            .map(|(s, f)| Reach {
                letter: model.format_word(s.word()),
                steps: f.map(|x| x.0),
                probability: f.map_or(0.0, |x| x.1),
            })
            .collect())
    }
}

/// Ten distinct non-identity elements of length at most 3, drawn from a
/// fixed stream.
fn off_diagonal_targets(model: &GroupModel, count: usize) -> Result<Vec<NormalForm>> {
    let alphabet = model.alphabet();
    let mut rng = trial_rng(0x7a11_e55e, 0);
    let mut out: Vec<NormalForm> = Vec::new();
    for _ in 0..1000 {
        if out.len() == count {
            break;
        }
        let len = rng.random_range(1..=3);
        let w: Word = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let g = model.evaluate(&w)?;
        if !g.is_identity() && !out.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressStats {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub k_grid: Vec<f64>,
    /// `tail[a][b] = P[d(o, w_n) < n / K]` with `K = k_grid[a]`,
    /// `n = n_grid[b]`.
    pub tail: Vec<Vec<f64>>,
    pub mean_distance: Vec<f64>,
    /// Mean `d(o, w_n) / n` at the largest `n`.
    pub progress_rate: f64,
    /// Least `K` whose tail decays: all zero, or a log-linear fit over the
    /// nonzero values with negative slope and `R^2 >= 0.9`.
    pub decaying_k: Option<f64>,
}

pub const DEFAULT_K_GRID: [f64; 8] = [1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0];

impl Chain<'_> {
    /// Monte Carlo estimates of `P[d(o, w_n) < n / K]`.
    pub fn linear_progress_stats(
        &self,
        o: &NormalForm,
        n_grid: &[usize],
        trials: usize,
        seed: u64,
        k_grid: &[f64],
    ) -> Result<ProgressStats> {
        if trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        let n_max = n_grid.iter().copied().max().unwrap_or(0);
        let dists: Vec<Vec<usize>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let d = self.sample_path(o, n_max, seed, t)?.distances_from_start(self.model)?;
                Ok(n_grid.iter().map(|&n| d[n]).collect())
            })
            .collect::<Result<_>>()?;
        let tf = trials as f64;
        let tail: Vec<Vec<f64>> = k_grid
            .iter()
            .map(|&k| {
                n_grid
                    .iter()
                    .enumerate()
                    .map(|(b, &n)| dists.iter().filter(|d| (d[b] as f64) < n as f64 / k).count() as f64 / tf)
                    .collect()
            })
            .collect();
        let mean_distance: Vec<f64> = (0..n_grid.len())
            .map(|b| dists.iter().map(|d| d[b] as f64).sum::<f64>() / tf)
            .collect();
        let progress_rate = match n_grid.iter().enumerate().max_by_key(|(_, &n)| n) {
            Some((b, &n)) if n > 0 => mean_distance[b] / n as f64,
            _ => 0.0,
        };
        let decaying_k = k_grid
            .iter()
            .zip(&tail)
            .filter(|(_, row)| tail_decays(n_grid, row))
            .map(|(&k, _)| k)
            .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.min(k))));
        Ok(ProgressStats {
            n_grid: n_grid.to_vec(),
            trials,
            k_grid: k_grid.to_vec(),
            tail,
            mean_distance,
            progress_rate,
            decaying_k,
        })
    }
}

fn tail_decays(n_grid: &[usize], row: &[f64]) -> bool {
    if row.iter().all(|&p| p == 0.0) {
        return true;
    }
    let pts: Vec<(f64, f64)> = n_grid
        .iter()
        .zip(row)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, &p)| (n as f64, p.ln()))
        .collect();
    if pts.len() < 2 {
        // a single nonzero value followed by zeros
        return row.last() == Some(&0.0);
    }
    let fit = crate::lab::linear_fit(&pts);
    fit.slope < 0.0 && fit.r2 >= 0.9
}
