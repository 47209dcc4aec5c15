//! Group models with a solvable word problem.
//!
//! Every family supplies a canonical [`NormalForm`] per element. For all
//! families the normal form is a geodesic word, so `|evaluate(w)|` is the
//! word length of the element `w` represents.

mod raag;
mod small_cancellation;

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::area;
use crate::error::{Error, Result};
use crate::presentation::{builtin, Presentation};
use crate::word::{push_reduced, Letter, Word};

pub use raag::Raag;
pub use small_cancellation::SmallCancellation;

/// Default cap on the number of elements a ball enumeration may hold.
pub const DEFAULT_BALL_BUDGET: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Raag { edges: Vec<(usize, usize)> },
    SmallCancellation,
    GenericBudgeted { radius: usize },
}

/// Canonical word of a group element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalForm(Word);

impl NormalForm {
    pub fn identity() -> Self {
        NormalForm(Word::empty())
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn into_word(self) -> Word {
        self.0
    }

    /// Word length `d_S(1, g)`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug)]
enum Engine {
    Free,
    Abelian,
    Raag(Raag),
    SmallCancellation(SmallCancellation),
    Generic { radius: usize, slack: usize, area_cap: usize },
}

/// A finitely presented group together with its word-problem strategy.
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct GroupModel {
    presentation: Presentation,
    family: Family,
    engine: Engine,
    ball_budget: usize,
}

impl GroupModel {
    /// Picks a strategy from the shape of the presentation: no relators is
    /// free, commutators only is a right-angled Artin group (free abelian
    /// when the graph is complete), `C'(1/6)` uses Dehn's algorithm, anything
    /// else is the budgeted generic search with `generic_radius`.
    pub fn from_presentation(p: Presentation, generic_radius: usize) -> Self {
        let rank = p.rank();
        let (family, engine) = if p.relators.is_empty() {
            (Family::Free { rank }, Engine::Free)
        } else if let Some(edges) = p.commutator_graph() {
            if edges.len() == rank * (rank - 1) / 2 {
                (Family::FreeAbelian { rank }, Engine::Abelian)
            } else {
                let r = Raag::new(rank, &edges);
                (Family::Raag { edges }, Engine::Raag(r))
            }
        } else if p.check_small_cancellation(1, 6).holds {
            (Family::SmallCancellation, Engine::SmallCancellation(SmallCancellation::new(&p)))
        } else {
            return GroupModel::generic(p, generic_radius);
        };
        GroupModel {
            presentation: p,
            family,
            engine,
            ball_budget: DEFAULT_BALL_BUDGET,
        }
    }

    /// Budgeted word problem by bounded relator search, for presentations
    /// without a structural strategy.
    pub fn generic(p: Presentation, radius: usize) -> Self {
        GroupModel {
            presentation: p,
            family: Family::GenericBudgeted { radius },
            engine: Engine::Generic {
                radius,
                slack: 4,
                area_cap: 64,
            },
            ball_budget: DEFAULT_BALL_BUDGET,
        }
    }

    /// One of `f2`, `z2`, `raag-p3`, `genus2`.
    pub fn builtin(name: &str) -> Result<Self> {
        let p = builtin(name).ok_or_else(|| Error::InvalidInput(format!("unknown builtin group {name:?}")))?;
        Ok(GroupModel::from_presentation(p, 6))
    }

    pub fn with_ball_budget(mut self, max_elements: usize) -> Self {
        self.ball_budget = max_elements;
        self
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &str {
        &self.presentation.name
    }

    pub fn rank(&self) -> usize {
        self.presentation.rank()
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        self.presentation.alphabet()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        self.presentation.parse_word(text)
    }

    pub fn format_word(&self, w: &Word) -> String {
        self.presentation.format_word(w)
    }

    /// Radius budget under which generic answers are decided.
    pub fn budget(&self) -> Option<usize> {
        match self.engine {
            Engine::Generic { radius, .. } => Some(radius),
            _ => None,
        }
    }

    pub(crate) fn raag(&self) -> Option<&Raag> {
        match &self.engine {
            Engine::Raag(r) => Some(r),
            _ => None,
        }
    }

    pub(crate) fn small_cancellation(&self) -> Option<&SmallCancellation> {
        match &self.engine {
            Engine::SmallCancellation(s) => Some(s),
            _ => None,
        }
    }

    fn check_alphabet(&self, w: &Word) -> Result<()> {
        let k = self.rank();
        match w.0.iter().find(|l| l.generator() >= k) {
            Some(l) => Err(Error::UnknownLetter(format!("generator #{}", l.generator()))),
            None => Ok(()),
        }
    }

    /// Canonical representative of the element `w` represents.
    pub fn evaluate(&self, w: &Word) -> Result<NormalForm> {
        self.check_alphabet(w)?;
        self.evaluate_letters(&w.0)
    }

    fn evaluate_letters(&self, letters: &[Letter]) -> Result<NormalForm> {
        let word = match &self.engine {
            Engine::Free => {
                let mut out = Vec::with_capacity(letters.len());
                for &l in letters {
                    push_reduced(&mut out, l);
                }
                Word(out)
            }
            Engine::Abelian => {
                let mut e = vec![0i64; self.rank()];
                for l in letters {
                    e[l.generator()] += l.sign();
                }
                abelian_word(&e)
            }
            Engine::Raag(r) => {
                let (red, _) = r.reduce(letters);
                Word(r.lex_normal_form(red))
            }
            Engine::SmallCancellation(sc) => Word(sc.normal_form(letters)),
            Engine::Generic { .. } => return self.generic_normal_form(letters),
        };
        Ok(NormalForm(word))
    }

    /// Whether `w` represents the identity.
    pub fn is_identity(&self, w: &Word) -> Result<bool> {
        self.check_alphabet(w)?;
        match &self.engine {
            Engine::Free => Ok(w.free_reduce().is_empty()),
            Engine::Abelian => Ok(w.exponent_sums(self.rank()).iter().all(|&e| e == 0)),
            Engine::Raag(r) => Ok(r.reduce(&w.0).0.is_empty()),
            Engine::SmallCancellation(sc) => Ok(sc.is_identity(&w.0)),
            Engine::Generic { .. } => Ok(self.generic_normal_form(&w.0)?.is_identity()),
        }
    }

    pub fn multiply(&self, g: &NormalForm, h: &NormalForm) -> Result<NormalForm> {
        self.evaluate_letters(&g.word().concat(h.word()).0)
    }

    pub fn inverse(&self, g: &NormalForm) -> Result<NormalForm> {
        self.evaluate_letters(&g.word().invert().0)
    }

    /// `d_S(g, h) = |g^-1 h|`.
    pub fn distance(&self, g: &NormalForm, h: &NormalForm) -> Result<usize> {
        Ok(self.evaluate_letters(&g.word().invert().concat(h.word()).0)?.len())
    }

    /// Shortlex-least geodesic word for `g`.
    pub fn geodesic_representative(&self, g: &NormalForm) -> Result<Word> {
        match self.engine {
            Engine::Abelian => {
                let mut letters = g.word().0.clone();
                letters.sort();
                Ok(Word(letters))
            }
            _ => Ok(g.word().clone()),
        }
    }

    /// All elements at distance at most `radius` from the identity,
    /// enumerated breadth-first in shortlex order.
    pub fn ball(&self, radius: usize) -> Result<Ball> {
        if let Some(b) = self.budget() {
            if radius > b {
                return Err(Error::BudgetExceeded(format!(
                    "ball radius {radius} beyond word-problem radius {b}"
                )));
            }
        }
        let alphabet = self.alphabet();
        let mut ball = Ball::default();
        ball.insert(NormalForm::identity(), 0, Word::empty());
        let mut frontier_start = 0;
        for d in 1..=radius {
            let frontier_end = ball.entries.len();
            for idx in frontier_start..frontier_end {
                let base = ball.entries[idx].geodesic.clone();
                let base_nf = ball.entries[idx].element.clone();
                for &l in &alphabet {
                    let mut letters = base_nf.word().0.clone();
                    letters.push(l);
                    let nf = self.evaluate_letters(&letters)?;
                    if !ball.index.contains_key(&nf) {
                        let mut geo = base.clone();
                        geo.push(l);
                        ball.insert(nf, d, geo);
                        if ball.entries.len() > self.ball_budget {
                            return Err(Error::BudgetExceeded(format!(
                                "ball of radius {radius} exceeds {} elements",
                                self.ball_budget
                            )));
                        }
                    }
                }
            }
            frontier_start = frontier_end;
        }
        ball.radius = radius;
        Ok(ball)
    }

    /// Incremental accumulator of a group element.
    pub fn reducer(&self) -> Reducer<'_> {
        let state = match &self.engine {
            Engine::Free => ReducerState::Free(VecDeque::new()),
            Engine::Abelian => ReducerState::Abelian {
                exps: vec![0; self.rank()],
                len: 0,
            },
            Engine::Raag(_) => ReducerState::Raag(VecDeque::new()),
            _ => ReducerState::Raw {
                letters: VecDeque::new(),
                cached: Some(0),
            },
        };
        Reducer { model: self, state }
    }

    fn generic_normal_form(&self, letters: &[Letter]) -> Result<NormalForm> {
        let Engine::Generic { radius, slack, area_cap } = self.engine else {
            unreachable!()
        };
        let mut w = Vec::with_capacity(letters.len());
        for &l in letters {
            push_reduced(&mut w, l);
        }
        if w.is_empty() {
            return Ok(NormalForm::identity());
        }
        let alphabet = self.alphabet();
        let limit = w.len().min(radius);
        for len in 0..=limit {
            let mut found = None;
            for_each_reduced_word(&alphabet, len, &mut |v| {
                let mut probe = w.clone();
                for l in v.iter().rev() {
                    push_reduced(&mut probe, l.inverse());
                }
                let eq = probe.is_empty()
                    || area::search_area(&self.presentation, &probe, slack, area_cap).is_some();
                if eq {
                    found = Some(v.to_vec());
                }
                eq
            });
            if let Some(v) = found {
                return Ok(NormalForm(Word(v)));
            }
        }
        Err(Error::BudgetExceeded(format!(
            "no representative of length <= {radius} found"
        )))
    }
}

fn abelian_word(e: &[i64]) -> Word {
    let mut out = Vec::new();
    for (i, &x) in e.iter().enumerate() {
        let l = if x >= 0 { Letter::gen(i as u8) } else { Letter::inv(i as u8) };
        out.extend(std::iter::repeat_n(l, x.unsigned_abs() as usize));
    }
    Word(out)
}

/// Calls `f` on every freely reduced word of length `len` in lexicographic
/// order until it returns `true`.
pub(crate) fn for_each_reduced_word(alphabet: &[Letter], len: usize, f: &mut dyn FnMut(&[Letter]) -> bool) {
    fn rec(alphabet: &[Letter], len: usize, cur: &mut Vec<Letter>, f: &mut dyn FnMut(&[Letter]) -> bool) -> bool {
        if cur.len() == len {
            return f(cur);
        }
        for &l in alphabet {
            if cur.last() == Some(&l.inverse()) {
                continue;
            }
            cur.push(l);
            let stop = rec(alphabet, len, cur, f);
            cur.pop();
            if stop {
                return true;
            }
        }
        false
    }
    rec(alphabet, len, &mut Vec::with_capacity(len), f);
}

#[derive(Clone, Debug)]
pub struct BallEntry {
    pub element: NormalForm,
    pub distance: usize,
    /// Shortlex-least geodesic word.
    pub geodesic: Word,
}

/// Result of a ball enumeration, in breadth-first shortlex order.
#[derive(Clone, Debug, Default)]
pub struct Ball {
    entries: Vec<BallEntry>,
    index: FxHashMap<NormalForm, usize>,
    radius: usize,
}

impl Ball {
    fn insert(&mut self, element: NormalForm, distance: usize, geodesic: Word) {
        self.index.insert(element.clone(), self.entries.len());
        self.entries.push(BallEntry {
            element,
            distance,
            geodesic,
        });
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BallEntry] {
        &self.entries
    }

    pub fn get(&self, g: &NormalForm) -> Option<&BallEntry> {
        self.index.get(g).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, g: &NormalForm) -> bool {
        self.index.contains_key(g)
    }

    pub fn distance(&self, g: &NormalForm) -> Option<usize> {
        self.get(g).map(|e| e.distance)
    }

    /// Number of elements at each exact distance.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius + 1];
        for e in &self.entries {
            out[e.distance] += 1;
        }
        out
    }
}

enum ReducerState {
    Free(VecDeque<Letter>),
    Abelian { exps: Vec<i64>, len: usize },
    Raag(VecDeque<Letter>),
    Raw { letters: VecDeque<Letter>, cached: Option<usize> },
}

/// Tracks a group element under multiplication by letters on either side,
/// answering its word length.
pub struct Reducer<'a> {
    model: &'a GroupModel,
    state: ReducerState,
}

impl Reducer<'_> {
    /// Right-multiplies by `l`.
    pub fn push_back(&mut self, l: Letter) {
        match &mut self.state {
            ReducerState::Free(d) => {
                if d.back() == Some(&l.inverse()) {
                    d.pop_back();
                } else {
                    d.push_back(l);
                }
            }
            ReducerState::Abelian { exps, len } => bump(exps, len, l),
            ReducerState::Raag(d) => {
                self.model.raag().expect("raag engine").push_back(d, l);
            }
            ReducerState::Raw { letters, cached } => {
                if letters.back() == Some(&l.inverse()) {
                    letters.pop_back();
                } else {
                    letters.push_back(l);
                }
                *cached = None;
            }
        }
    }

    /// Left-multiplies by `l`.
    pub fn push_front(&mut self, l: Letter) {
        match &mut self.state {
            ReducerState::Free(d) => {
                if d.front() == Some(&l.inverse()) {
                    d.pop_front();
                } else {
                    d.push_front(l);
                }
            }
            ReducerState::Abelian { exps, len } => bump(exps, len, l),
            ReducerState::Raag(d) => {
                self.model.raag().expect("raag engine").push_front(d, l);
            }
            ReducerState::Raw { letters, cached } => {
                if letters.front() == Some(&l.inverse()) {
                    letters.pop_front();
                } else {
                    letters.push_front(l);
                }
                *cached = None;
            }
        }
    }

    pub fn push_word_back(&mut self, w: &Word) {
        for &l in &w.0 {
            self.push_back(l);
        }
    }

    /// Word length of the current element.
    pub fn len(&mut self) -> Result<usize> {
        match &mut self.state {
            ReducerState::Free(d) | ReducerState::Raag(d) => Ok(d.len()),
            ReducerState::Abelian { len, .. } => Ok(*len),
            ReducerState::Raw { letters, cached } => {
                if let Some(c) = cached {
                    return Ok(*c);
                }
                let v: Vec<Letter> = letters.iter().copied().collect();
                let n = self.model.evaluate_letters(&v)?.len();
                *cached = Some(n);
                Ok(n)
            }
        }
    }

    pub fn is_empty(&mut self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    pub fn element(&self) -> Result<NormalForm> {
        let letters: Vec<Letter> = match &self.state {
            ReducerState::Free(d) | ReducerState::Raag(d) | ReducerState::Raw { letters: d, .. } => {
                d.iter().copied().collect()
            }
            ReducerState::Abelian { exps, .. } => return Ok(NormalForm(abelian_word(exps))),
        };
        self.model.evaluate_letters(&letters)
    }
}

fn bump(exps: &mut [i64], len: &mut usize, l: Letter) {
    let e = &mut exps[l.generator()];
    let before = e.unsigned_abs() as usize;
    *e += l.sign();
    *len = *len + e.unsigned_abs() as usize - before;
}
