//! Numerical tolerances shared by all modules.
//!
//! Defaults can be scaled at runtime through the `CIRCLE_PATTERN_TOL`
//! environment variable, which replaces the base relative tolerance used for
//! algebraic identities. Everything else stays fixed.

use std::sync::OnceLock;

/// Environment variable overriding [`Tolerances::algebraic`].
pub const TOLERANCE_ENV: &str = "CIRCLE_PATTERN_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for algebraic identities in double precision.
    pub algebraic: f64,
    /// Arguments with `|Arg cr|` below this count as zero (cocircular pairs).
    pub zero_angle: f64,
    /// Singular values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// `|tr^2/det - 4|` below this counts as parabolic.
    pub parabolic: f64,
    /// Relative distance under which two lifted positions count as equal.
    pub layout: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            zero_angle: 1e-8,
            rank: 1e-8,
            parabolic: 1e-10,
            layout: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults with the environment override applied.
    pub fn from_env() -> Self {
        let mut tol = Self::default();
        if let Some(v) = std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            tol.algebraic = v;
        }
        tol
    }
}

/// Process-wide tolerances, read once.
pub fn global() -> &'static Tolerances {
    static TOL: OnceLock<Tolerances> = OnceLock::new();
    TOL.get_or_init(Tolerances::from_env)
}
