//! Small statistical helpers shared by the axis, slope and regression code.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

/// Significance marker using the usual 0.05 / 0.01 / 0.001 cut points
/// (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stars {
    #[serde(rename = "ns")]
    Ns,
    #[serde(rename = "*")]
    One,
    #[serde(rename = "**")]
    Two,
    #[serde(rename = "***")]
    Three,
}

impl Stars {
    pub fn from_p(p: f64) -> Stars {
        if p <= 0.001 {
            Stars::Three
        } else if p <= 0.01 {
            Stars::Two
        } else if p <= 0.05 {
            Stars::One
        } else {
            Stars::Ns
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::Ns => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom,
/// `P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (divides by `n - 1`).
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}
