//! Evaluable descriptors of target functions and dense polynomials.
//!
//! Every estimator in this crate needs exact first and second derivatives of
//! the target function, so the catalogue carries analytic derivatives instead
//! of automatic differentiation. The catalogue is deliberately small:
//! `power(k)`, `inverse`, `kth_root(k)`, `abs`, `cos(u)`, `identity(c)`.

use crate::error::{Error, Result};

/// Catalogue entry selector with its parameters.
#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// x^k, integer k ≥ 1.
    Power(u32),
    /// 1/x; meaningful on [L, ∞) for a caller-supplied L > 0.
    Inverse,
    /// x^(1/k) on [0, ∞), integer k ≥ 1.
    KthRoot(u32),
    /// |x|; not twice differentiable, kept for bias diagnostics only.
    Abs,
    /// cos(u·x).
    Cos(f64),
    /// c·x.
    Identity(f64),
}

/// A target function f with exact analytic derivatives and domain metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFunction {
    kind: Kind,
}

/// Builds a catalogue function from its name and parameter list.
///
/// Accepted names: `power` (params `[k]`, k ≥ 1), `inverse`, `kth_root`
/// (params `[k]`, k ≥ 1), `abs`, `cos` (params `[u]`), `identity`
/// (params `[c]`, defaulting to c = 1).
pub fn builtin(name: &str, params: &[f64]) -> Result<SmoothFunction> {
    let int_param = |what: &str| -> Result<u32> {
        match params {
            [k] if *k >= 1.0 && k.fract() == 0.0 && *k <= u32::MAX as f64 => Ok(*k as u32),
            _ => Err(Error::InvalidParams {
                name: name.to_string(),
                reason: format!("expected a single integer {what} ≥ 1, got {params:?}"),
            }),
        }
    };
    let kind = match name {
        "power" => Kind::Power(int_param("exponent")?),
        "inverse" => Kind::Inverse,
        "kth_root" => Kind::KthRoot(int_param("root order")?),
        "abs" => Kind::Abs,
        "cos" => match params {
            [u] => Kind::Cos(*u),
            _ => {
                return Err(Error::InvalidParams {
                    name: name.to_string(),
                    reason: format!("expected a single frequency parameter, got {params:?}"),
                })
            }
        },
        "identity" => match params {
            [] => Kind::Identity(1.0),
            [c] => Kind::Identity(*c),
            _ => {
                return Err(Error::InvalidParams {
                    name: name.to_string(),
                    reason: format!("expected at most one scale parameter, got {params:?}"),
                })
            }
        },
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    if !params.is_empty() && matches!(kind, Kind::Inverse | Kind::Abs) {
        return Err(Error::InvalidParams {
            name: name.to_string(),
            reason: "takes no parameters".to_string(),
        });
    }
    Ok(SmoothFunction { kind })
}

impl SmoothFunction {
    pub fn power(k: u32) -> Self {
        builtin("power", &[k as f64]).expect("k ≥ 1 checked by caller")
    }

    pub fn inverse() -> Self {
        SmoothFunction { kind: Kind::Inverse }
    }

    pub fn kth_root(k: u32) -> Self {
        builtin("kth_root", &[k as f64]).expect("k ≥ 1 checked by caller")
    }

    pub fn abs() -> Self {
        SmoothFunction { kind: Kind::Abs }
    }

    pub fn cos(u: f64) -> Self {
        SmoothFunction { kind: Kind::Cos(u) }
    }

    pub fn identity(c: f64) -> Self {
        SmoothFunction { kind: Kind::Identity(c) }
    }

    /// f(x).
    pub fn value_at(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Power(k) => x.powi(k as i32),
            Kind::Inverse => 1.0 / x,
            Kind::KthRoot(k) => x.powf(1.0 / k as f64),
            Kind::Abs => x.abs(),
            Kind::Cos(u) => (u * x).cos(),
            Kind::Identity(c) => c * x,
        }
    }

    /// f′(x).
    pub fn d1_at(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Power(k) => k as f64 * x.powi(k as i32 - 1),
            Kind::Inverse => -1.0 / (x * x),
            Kind::KthRoot(k) => {
                let r = 1.0 / k as f64;
                r * x.powf(r - 1.0)
            }
            Kind::Abs => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Cos(u) => -u * (u * x).sin(),
            Kind::Identity(c) => c,
        }
    }

    /// f″(x). For `abs` this is the almost-everywhere value 0; the point mass
    /// at the kink is why `abs` is flagged non-twice-differentiable.
    pub fn d2_at(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Power(k) => {
                if k < 2 {
                    0.0
                } else {
                    (k * (k - 1)) as f64 * x.powi(k as i32 - 2)
                }
            }
            Kind::Inverse => 2.0 / (x * x * x),
            Kind::KthRoot(k) => {
                let r = 1.0 / k as f64;
                r * (r - 1.0) * x.powf(r - 2.0)
            }
            Kind::Abs => 0.0,
            Kind::Cos(u) => -u * u * (u * x).cos(),
            Kind::Identity(_) => 0.0,
        }
    }

    /// Lower end of the natural domain, if the function has one.
    ///
    /// `inverse` returns `None`: the caller must supply a positive lower
    /// bound for any construction that needs one.
    pub fn domain_lower(&self) -> Option<f64> {
        match self.kind {
            Kind::KthRoot(_) => Some(0.0),
            _ => None,
        }
    }

    /// Display name, e.g. `power(3)` or `inverse`.
    pub fn name(&self) -> String {
        match self.kind {
            Kind::Power(k) => format!("power({k})"),
            Kind::Inverse => "inverse".to_string(),
            Kind::KthRoot(k) => format!("kth_root({k})"),
            Kind::Abs => "abs".to_string(),
            Kind::Cos(u) => format!("cos({u})"),
            Kind::Identity(c) => format!("identity({c})"),
        }
    }

    /// Whether the function grows at most polynomially on its domain.
    /// True for the whole catalogue.
    pub fn polynomial_growth(&self) -> bool {
        true
    }

    /// Whether the function is twice differentiable everywhere on its domain.
    /// False only for `abs`.
    pub fn twice_differentiable(&self) -> bool {
        !matches!(self.kind, Kind::Abs)
    }

    pub(crate) fn is_inverse(&self) -> bool {
        matches!(self.kind, Kind::Inverse)
    }
}

/// Dense real polynomial; `coeffs[i]` multiplies x^i.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of x^i (0 beyond the stored length).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Highest index with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    /// Horner evaluation of Σ coeffs[i]·x^i.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Exact coefficient-shift derivative of the given order.
    pub fn derivative(&self, order: usize) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..order {
            coeffs = if coeffs.len() <= 1 {
                vec![0.0]
            } else {
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, &c)| i as f64 * c)
                    .collect()
            };
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    /// Product polynomial (coefficient convolution).
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    /// self − c (constant shift of the constant term).
    pub fn sub_const(&self, c: f64) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        coeffs[0] -= c;
        Polynomial { coeffs }
    }

    /// self + scale·other.
    pub fn add_scaled(&self, scale: f64, other: &Polynomial) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < other.coeffs.len() {
            coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += scale * c;
        }
        Polynomial { coeffs }
    }

    /// Composition with a linear change of variable: returns q with
    /// q(x) = self(s·x + t), expanded by Horner in polynomial arithmetic.
    pub fn substitute_linear(&self, s: f64, t: f64) -> Polynomial {
        let base = Polynomial::new(vec![t, s]);
        let mut out = Polynomial::zero();
        for &c in self.coeffs.iter().rev() {
            out = out.mul(&base);
            out.coeffs[0] += c;
        }
        out.coeffs.resize(self.coeffs.len().max(1), 0.0);
        out
    }
}

/// Free-function form of [`Polynomial::eval`].
pub fn poly_eval(p: &Polynomial, x: f64) -> f64 {
    p.eval(x)
}

/// Free-function form of [`Polynomial::derivative`].
pub fn poly_derivative(p: &Polynomial, order: usize) -> Polynomial {
    p.derivative(order)
}
