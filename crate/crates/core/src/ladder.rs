//! Generalized ladder operators acting on the spinor eigenbasis.
//!
//! Each ladder is fixed by sequences `p_n`, `q_n` (the actions of the
//! one-dimensional operators `theta^∓`) and a weight `f(n)`. The spinor
//! operators `A^∓` are realized through their spectral actions:
//!
//! ```text
//! A^- Psi_n = sqrt(p_n) f(n)   Psi_{n-1}
//! A^+ Psi_n = sqrt(q_n) f(n+1) Psi_{n+1}
//! ```
//!
//! which is the complete content of the operators since every function of
//! the partner Hamiltonian is diagonal on the eigenbasis.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oscillator::{Action, Direction};
use crate::spinors::LayerKind;

/// `|f(n)|` below this counts as a root.
pub const ROOT_EPS: f64 = 1e-14;
/// Indices scanned when validating a ladder.
pub const SCAN_LIMIT: usize = 1024;

type SeqFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Weight function `f` on the non-negative integers.
#[derive(Clone)]
pub enum Weight {
    /// `f(n) = 1` for every `n`.
    One,
    /// `f(1), f(2), ...`; indices past the end repeat the last entry.
    Table(Vec<f64>),
    Func(SeqFn),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => f.write_str("One"),
            Weight::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Weight::Func(_) => f.write_str("Func(..)"),
        }
    }
}

impl Weight {
    pub fn func<F: Fn(usize) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Weight::Func(Arc::new(f))
    }

    /// `f(n)`. `f(0)` never enters a ladder action and reads as 1.
    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match self {
            Weight::One => 1.0,
            Weight::Table(t) => match t.get(n - 1) {
                Some(v) => *v,
                None => t.last().copied().unwrap_or(1.0),
            },
            Weight::Func(f) => f(n),
        }
    }
}

/// Ladder definition `(p_n, q_n, f)` plus the declared roots of `f`.
#[derive(Clone)]
pub struct LadderSpec {
    p: SeqFn,
    q: SeqFn,
    f: Weight,
    roots: Vec<usize>,
}

impl fmt::Debug for LadderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LadderSpec")
            .field("p[0..4]", &(0..4).map(|n| self.p(n)).collect::<Vec<_>>())
            .field("q[0..4]", &(0..4).map(|n| self.q(n)).collect::<Vec<_>>())
            .field("f", &self.f)
            .field("roots", &self.roots)
            .finish()
    }
}

impl LadderSpec {
    /// Build and validate a ladder. `roots` must list exactly the indices in
    /// `1..=SCAN_LIMIT` where `|f(n)| < ROOT_EPS`.
    pub fn new<P, Q>(p: P, q: Q, f: Weight, mut roots: Vec<usize>) -> Result<Self>
    where
        P: Fn(usize) -> f64 + Send + Sync + 'static,
        Q: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        roots.sort_unstable();
        roots.dedup();
        let spec = Self {
            p: Arc::new(p),
            q: Arc::new(q),
            f,
            roots,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `p_n = n`, `q_n = n + 1`, `f = 1`.
    pub fn oscillator() -> Self {
        Self::oscillator_with(Weight::One, Vec::new()).expect("oscillator ladder is valid")
    }

    /// Oscillator `p`, `q` with a custom weight.
    pub fn oscillator_with(f: Weight, roots: Vec<usize>) -> Result<Self> {
        Self::new(|n| n as f64, |n| (n + 1) as f64, f, roots)
    }

    /// Same `p`, `q`, different weight.
    pub fn with_weight(&self, f: Weight, mut roots: Vec<usize>) -> Result<Self> {
        roots.sort_unstable();
        roots.dedup();
        let spec = Self {
            p: self.p.clone(),
            q: self.q.clone(),
            f,
            roots,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.p(0) != 0.0 {
            return Err(Error::InvalidLadder(format!("p_0 must be 0, got {}", self.p(0))));
        }
        if let Some(&r) = self.roots.first() {
            if r == 0 {
                return Err(Error::InvalidLadder("roots are indices n >= 1".into()));
            }
        }
        for n in 0..=SCAN_LIMIT {
            let (p, q) = (self.p(n), self.q(n));
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidLadder(format!("p_{n} = {p} is not a finite non-negative number")));
            }
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::InvalidLadder(format!("q_{n} = {q} must be positive")));
            }
        }
        for n in 1..=SCAN_LIMIT {
            let v = self.f.value(n);
            if !v.is_finite() {
                return Err(Error::InvalidLadder(format!("f({n}) = {v} is not finite")));
            }
            let is_root = v.abs() < ROOT_EPS;
            let declared = self.roots.binary_search(&n).is_ok();
            if is_root != declared {
                return Err(Error::InvalidLadder(if is_root {
                    format!("f({n}) = {v:e} is a root but was not declared")
                } else {
                    format!("declared root {n} has f({n}) = {v:e}")
                }));
            }
        }
        if let Some(&r) = self.roots.last() {
            if r > SCAN_LIMIT && self.f.value(r).abs() >= ROOT_EPS {
                return Err(Error::InvalidLadder(format!("declared root {r} has f({r}) = {:e}", self.f.value(r))));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn p(&self, n: usize) -> f64 {
        (self.p)(n)
    }

    #[inline]
    pub fn q(&self, n: usize) -> f64 {
        (self.q)(n)
    }

    #[inline]
    pub fn f(&self, n: usize) -> f64 {
        self.f.value(n)
    }

    pub fn weight(&self) -> &Weight {
        &self.f
    }

    /// Sorted roots `m_1 < m_2 < ...` of `f`.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn max_root(&self) -> Option<usize> {
        self.roots.last().copied()
    }

    pub fn has_roots(&self) -> bool {
        !self.roots.is_empty()
    }
}

/// Layer-specific weight `f_1(E_n)` or `f_2(E_n)` that absorbs the
/// normalization prefactors of the spinor ladder actions. Requires `n >= 1`.
pub fn case_map_f(kind: LayerKind, f: &Weight, n: usize) -> f64 {
    let fac = match (kind, n) {
        (LayerKind::Monolayer, 1) => std::f64::consts::FRAC_1_SQRT_2,
        (LayerKind::Monolayer, _) => 0.5,
        (LayerKind::Bilayer, 1) => 1.0,
        (LayerKind::Bilayer, 2) => std::f64::consts::FRAC_1_SQRT_2,
        (LayerKind::Bilayer, _) => 0.5,
    };
    f.value(n) * fac
}

/// Raw spinor action before the case map: `2 sqrt(p_n) f_G(E_n) * κ_n` with
/// the layer factor `κ_n`. Composing with [`case_map_f`] must reproduce
/// [`action_coefficient`]; kept for cross-checking that bookkeeping.
pub fn raw_spinor_action(kind: LayerKind, spec: &LadderSpec, direction: Direction, n: usize) -> Action {
    match direction {
        Direction::Down => {
            if n == 0 {
                return Action::annihilated();
            }
            let kappa = match (kind, n) {
                (LayerKind::Monolayer, 1) => std::f64::consts::FRAC_1_SQRT_2,
                (LayerKind::Monolayer, _) => 1.0,
                (LayerKind::Bilayer, 1) => 0.5,
                (LayerKind::Bilayer, 2) => std::f64::consts::FRAC_1_SQRT_2,
                (LayerKind::Bilayer, _) => 1.0,
            };
            Action {
                coefficient: 2.0 * spec.p(n).sqrt() * case_map_f(kind, spec.weight(), n) * kappa,
                target: Some(n - 1),
            }
        }
        Direction::Up => {
            let kappa = match (kind, n) {
                (LayerKind::Monolayer, 0) => std::f64::consts::FRAC_1_SQRT_2,
                (LayerKind::Monolayer, _) => 1.0,
                (LayerKind::Bilayer, 0) => 0.5,
                (LayerKind::Bilayer, 1) => std::f64::consts::FRAC_1_SQRT_2,
                (LayerKind::Bilayer, _) => 1.0,
            };
            Action {
                coefficient: 2.0 * spec.q(n).sqrt() * case_map_f(kind, spec.weight(), n + 1) * kappa,
                target: Some(n + 1),
            }
        }
    }
}

/// Unified action of `A^∓` on `Psi_n` (identical for both layers).
pub fn action_coefficient(spec: &LadderSpec, direction: Direction, n: usize) -> Action {
    match direction {
        Direction::Down if n == 0 => Action::annihilated(),
        Direction::Down => Action {
            coefficient: spec.p(n).sqrt() * spec.f(n),
            target: Some(n - 1),
        },
        Direction::Up => Action {
            coefficient: spec.q(n).sqrt() * spec.f(n + 1),
            target: Some(n + 1),
        },
    }
}

/// `gamma_n = sqrt(q_{n-1} p_n) f(n)^2`, the eigenvalue of `A^+ A^-` on `Psi_n`.
/// `gamma_0 = 0`.
pub fn gamma_n(spec: &LadderSpec, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let f = spec.f(n);
    (spec.q(n - 1) * spec.p(n)).sqrt() * f * f
}

/// Diagonal of the commutator `[A^-, A^+]` on `Psi_n`: `gamma_{n+1} - gamma_n`.
pub fn commutator_diagonal(spec: &LadderSpec, n: usize) -> f64 {
    gamma_n(spec, n + 1) - gamma_n(spec, n)
}

/// Weight `f(1..=n_max)` making `[A^-, A^+] = 1`:
///
/// ```text
/// f(1)   = (q_0 p_1)^{-1/4}
/// f(n+1) = sqrt((1 + sqrt(q_{n-1} p_n) f(n)^2) / sqrt(q_n p_{n+1}))
/// ```
pub fn hw_f_sequence<P, Q>(p: P, q: Q, n_max: usize) -> Result<Weight>
where
    P: Fn(usize) -> f64,
    Q: Fn(usize) -> f64,
{
    let mut out = Vec::with_capacity(n_max);
    let mut it = HwRecursion::new();
    for n in 1..=n_max {
        out.push(it.next_value(&p, &q, n)?);
    }
    Ok(Weight::Table(out))
}

/// Incremental form of [`hw_f_sequence`], used where the required length is
/// only known while a series is being built.
#[derive(Debug, Clone, Default)]
pub(crate) struct HwRecursion {
    prev: Option<f64>,
}

impl HwRecursion {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// `f(n)`; must be called with `n = 1, 2, ...` in order.
    pub(crate) fn next_value<P, Q>(&mut self, p: P, q: Q, n: usize) -> Result<f64>
    where
        P: Fn(usize) -> f64,
        Q: Fn(usize) -> f64,
    {
        let qp = q(n - 1) * p(n);
        if !(qp > 0.0) {
            return Err(Error::InvalidLadder(format!("q_{} p_{} = {qp} must be positive", n - 1, n)));
        }
        let v = match self.prev {
            None => qp.powf(-0.25),
            Some(fp) => {
                let back = (q(n - 2) * p(n - 1)).sqrt() * fp * fp;
                ((1.0 + back) / qp.sqrt()).sqrt()
            }
        };
        self.prev = Some(v);
        Ok(v)
    }
}
