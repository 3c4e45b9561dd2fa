use num_complex::Complex64;

/// Closed-form eigenvalue sequences `k ↦ μ_k`, `k = 1, 2, ...`, of generators.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumFormula {
    /// `μ_k = −1/k + i·k`.
    PaperExample,
    /// `μ_k = −k^(−re_decay) + i·k^(im_growth)`.
    ///
    /// On `σ(−A)` this gives `|Im λ| = (Re λ)^(−im_growth/re_decay)`, so the
    /// semigroup decays like `‖T(t)(−A)^(−α)‖ = O(1/t)` with
    /// `α = re_decay / im_growth`.
    PowerLaw { re_decay: f64, im_growth: f64 },
    /// `μ_k ↦ μ_k + r/μ_k` applied to a base sequence.
    Perturbed { base: Box<SpectrumFormula>, r: f64 },
}

impl SpectrumFormula {
    pub fn power_law(re_decay: f64, im_growth: f64) -> Self {
        SpectrumFormula::PowerLaw {
            re_decay,
            im_growth,
        }
    }

    /// Eigenvalue of mode `k` (1-based).
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        debug_assert!(k >= 1);
        let kf = k as f64;
        match self {
            SpectrumFormula::PaperExample => Complex64::new(-1.0 / kf, kf),
            SpectrumFormula::PowerLaw {
                re_decay,
                im_growth,
            } => Complex64::new(-kf.powf(-re_decay), kf.powf(*im_growth)),
            SpectrumFormula::Perturbed { base, r } => {
                let mu = base.eigenvalue(k);
                mu + *r / mu
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            SpectrumFormula::PaperExample => "paper-example".to_string(),
            SpectrumFormula::PowerLaw {
                re_decay,
                im_growth,
            } => format!("power-law(re_decay={re_decay},im_growth={im_growth})"),
            SpectrumFormula::Perturbed { base, r } => format!("perturbed({},r={r})", base.id()),
        }
    }

    pub(crate) fn check_parameters(&self) -> Result<(), String> {
        match self {
            SpectrumFormula::PaperExample => Ok(()),
            SpectrumFormula::PowerLaw {
                re_decay,
                im_growth,
            } => {
                if !re_decay.is_finite() || !im_growth.is_finite() {
                    return Err("power-law exponents must be finite".into());
                }
                if *im_growth < 0.0 {
                    return Err("im_growth must be nonnegative".into());
                }
                Ok(())
            }
            SpectrumFormula::Perturbed { base, r } => {
                if !(r.is_finite() && *r >= 0.0) {
                    return Err("perturbation size r must be finite and nonnegative".into());
                }
                base.check_parameters()
            }
        }
    }
}

/// How the spectrum of a diagonal operator is given.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel {
    Explicit(Vec<Complex64>),
    Formula {
        formula: SpectrumFormula,
        truncation: usize,
    },
}

impl SpectrumModel {
    pub fn paper_example(truncation: usize) -> Self {
        SpectrumModel::Formula {
            formula: SpectrumFormula::PaperExample,
            truncation,
        }
    }

    pub fn truncation(&self) -> usize {
        match self {
            SpectrumModel::Explicit(points) => points.len(),
            SpectrumModel::Formula { truncation, .. } => *truncation,
        }
    }

    pub fn formula(&self) -> Option<&SpectrumFormula> {
        match self {
            SpectrumModel::Explicit(_) => None,
            SpectrumModel::Formula { formula, .. } => Some(formula),
        }
    }

    pub(crate) fn generate(&self) -> Vec<Complex64> {
        match self {
            SpectrumModel::Explicit(points) => points.clone(),
            SpectrumModel::Formula {
                formula,
                truncation,
            } => (1..=*truncation).map(|k| formula.eigenvalue(k)).collect(),
        }
    }
}
