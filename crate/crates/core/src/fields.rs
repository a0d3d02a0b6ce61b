//! Pointwise SUSY-QM field quantities for a magnetic profile.
//!
//! Natural units are used throughout (hbar = v_F = c = e = m* = 1), so the
//! vector-potential amplitude enters the superpotential directly:
//! `W(x) = A(x) + k`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Below this |eta| the bilayer construction is treated as singular.
pub const ETA_EPS: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Vector-potential amplitude `A(x)` (field along z, potential along y) with
/// its first two derivatives.
#[derive(Clone)]
pub enum MagneticProfile {
    /// `A(x) = b0 * x`.
    Constant { b0: f64 },
    /// User-supplied amplitude with analytic derivatives.
    Custom { a: ScalarFn, a1: ScalarFn, a2: ScalarFn },
}

impl fmt::Debug for MagneticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MagneticProfile::Constant { b0 } => f.debug_struct("Constant").field("b0", b0).finish(),
            MagneticProfile::Custom { .. } => f.write_str("Custom { .. }"),
        }
    }
}

impl MagneticProfile {
    pub fn constant(b0: f64) -> Self {
        MagneticProfile::Constant { b0 }
    }

    /// Constant profile whose cyclotron parameter is `omega = 2 b0`.
    pub fn from_omega(omega: f64) -> Self {
        MagneticProfile::Constant { b0: 0.5 * omega }
    }

    pub fn custom<A, A1, A2>(a: A, a1: A1, a2: A2) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        A1: Fn(f64) -> f64 + Send + Sync + 'static,
        A2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MagneticProfile::Custom {
            a: Arc::new(a),
            a1: Arc::new(a1),
            a2: Arc::new(a2),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MagneticProfile::Constant { .. })
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        match self {
            MagneticProfile::Constant { b0 } => b0 * x,
            MagneticProfile::Custom { a, .. } => a(x),
        }
    }

    /// Magnetic field `B(x) = A'(x)`.
    #[inline]
    pub fn a1(&self, x: f64) -> f64 {
        match self {
            MagneticProfile::Constant { b0 } => *b0,
            MagneticProfile::Custom { a1, .. } => a1(x),
        }
    }

    #[inline]
    pub fn a2(&self, x: f64) -> f64 {
        match self {
            MagneticProfile::Constant { .. } => 0.0,
            MagneticProfile::Custom { a2, .. } => a2(x),
        }
    }
}

/// Energy branch: electrons (positive energies) or holes (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Electron,
    Hole,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Electron => 1.0,
            Branch::Hole => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "electron" | "+" | "+1" => Ok(Branch::Electron),
            "hole" | "-" | "-1" => Ok(Branch::Hole),
            other => Err(format!("unknown branch '{other}' (expected electron or hole)")),
        }
    }
}

/// Physical parameters of the constant-field problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    omega: f64,
    k: f64,
    branch: Branch,
}

impl UnitSystem {
    pub fn new(omega: f64, k: f64, branch: Branch) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidArgument(format!("k must be finite, got {k}")));
        }
        Ok(Self { omega, k, branch })
    }

    /// `omega = k = 1`, electron branch.
    pub fn unit() -> Self {
        Self { omega: 1.0, k: 1.0, branch: Branch::Electron }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Centre of the oscillator functions, `-2k/omega`.
    pub fn center(&self) -> f64 {
        -2.0 * self.k / self.omega
    }

    /// Dimensionless coordinate `z = sqrt(omega/2) (x + 2k/omega)`.
    #[inline]
    pub fn z(&self, x: f64) -> f64 {
        (0.5 * self.omega).sqrt() * (x - self.center())
    }

    pub fn profile(&self) -> MagneticProfile {
        MagneticProfile::from_omega(self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonolayerFields {
    pub w: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

/// Superpotential and partner potentials `V± = W² ± W'`.
pub fn monolayer_fields(profile: &MagneticProfile, x: f64, k: f64) -> MonolayerFields {
    let w = profile.a(x) + k;
    let w1 = profile.a1(x);
    MonolayerFields {
        w,
        v_minus: w * w - w1,
        v_plus: w * w + w1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilayerFields {
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub beta: f64,
    pub gamma: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

/// Second-order intertwining quantities for the bilayer Hamiltonian with
/// real factorization energies `eps1`, `eps2`.
pub fn bilayer_fields(profile: &MagneticProfile, x: f64, k: f64, eps1: f64, eps2: f64) -> Result<BilayerFields> {
    let eta = 2.0 * (k + profile.a(x));
    if !(eta.abs() >= ETA_EPS) {
        return Err(Error::DegenerateEta { x, eta });
    }
    let eta1 = 2.0 * profile.a1(x);
    let eta2 = 2.0 * profile.a2(x);
    let de = eps1 - eps2;
    let beta = (eta1 * eta1 - 2.0 * eta * eta2 - de * de) / (4.0 * eta * eta);
    let gamma = 0.25 * eta * eta + 0.5 * eta1 - eta2 / (2.0 * eta) + (eta1 / (2.0 * eta)).powi(2)
        - (de / (2.0 * eta)).powi(2);
    let v_minus = -gamma + 0.5 * eta * eta - 0.5 * eta1 + 0.5 * (eps1 + eps2);
    Ok(BilayerFields {
        eta,
        eta1,
        eta2,
        beta,
        gamma,
        v_minus,
        v_plus: v_minus + 2.0 * eta1,
    })
}
