//! Audience endorsement: OLS of rating or vote count on stereotype-strength
//! predictors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cast::Gender;
use crate::error::{Error, Result};
use crate::stats::{student_t_two_sided, Stars};

pub const PREDICTORS: [&str; 4] = ["male_lead", "n_cooccur", "female_increase", "male_increase"];

/// Everything the row builder needs from one analysed story.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoryPredictors {
    pub story_id: String,
    pub rating: Option<f64>,
    pub votes: Option<u64>,
    /// Gender of the most mentioned character.
    pub dominance: Option<Gender>,
    pub has_leading_pair: bool,
    pub n_cooccur: usize,
    pub female_increase: Option<f64>,
    pub male_increase: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndorsementRow {
    pub story_id: String,
    pub male_lead: u8,
    pub n_cooccur: usize,
    pub female_increase: f64,
    pub male_increase: f64,
    pub rating: f64,
    pub votes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    NoLeadingPair,
    NoRating,
    NoVotes,
    NoFemaleIncrease,
    NoMaleIncrease,
}

impl Exclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Exclusion::NoLeadingPair => "no_leading_pair",
            Exclusion::NoRating => "no_rating",
            Exclusion::NoVotes => "no_votes",
            Exclusion::NoFemaleIncrease => "no_female_increase",
            Exclusion::NoMaleIncrease => "no_male_increase",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RowSet {
    pub rows: Vec<EndorsementRow>,
    /// Excluded story count per reason; a story is counted under its first
    /// failing check only.
    pub excluded: BTreeMap<String, usize>,
}

fn check(p: &StoryPredictors) -> std::result::Result<EndorsementRow, Exclusion> {
    let dominance = match (p.has_leading_pair, p.dominance) {
        (true, Some(g)) => g,
        _ => return Err(Exclusion::NoLeadingPair),
    };
    let rating = p.rating.ok_or(Exclusion::NoRating)?;
    let votes = p.votes.filter(|&v| v > 0).ok_or(Exclusion::NoVotes)?;
    let female_increase = p.female_increase.ok_or(Exclusion::NoFemaleIncrease)?;
    let male_increase = p.male_increase.ok_or(Exclusion::NoMaleIncrease)?;
    Ok(EndorsementRow {
        story_id: p.story_id.clone(),
        male_lead: u8::from(dominance == Gender::Male),
        n_cooccur: p.n_cooccur,
        female_increase,
        male_increase,
        rating,
        votes,
    })
}

pub fn build_rows<'a>(stories: impl IntoIterator<Item = &'a StoryPredictors>) -> RowSet {
    let mut set = RowSet::default();
    for p in stories {
        match check(p) {
            Ok(row) => set.rows.push(row),
            Err(reason) => *set.excluded.entry(reason.as_str().to_string()).or_insert(0) += 1,
        }
    }
    set
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Rating,
    Votes,
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rating" => Ok(Outcome::Rating),
            "votes" => Ok(Outcome::Votes),
            other => Err(Error::Invalid(format!("unknown outcome {other:?} (expected rating or votes)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VotesScale {
    #[default]
    Log,
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub predictor: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
    pub stars: Stars,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub outcome_label: String,
    /// Intercept first, then predictors in design order.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub f_statistic: f64,
    pub n_cases: usize,
}

impl RegressionReport {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.predictor == name)
    }

    /// Plain-text table with estimates, standard errors in parentheses and
    /// stars, followed by the fit statistics.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "OLS regression predicting {}", self.outcome_label);
        let _ = writeln!(out, "{:<28}{:>14}{:>14}", "", "Estimate", "(SE)");
        for c in &self.coefficients {
            let est = format!("{:.4}{}", c.estimate, c.stars.as_str());
            let _ = writeln!(out, "{:<28}{:>14}{:>14}", c.predictor, est, format!("({:.4})", c.std_error));
        }
        let _ = writeln!(out, "{:<28}{:>14.4}", "R-squared", self.r_squared);
        let _ = writeln!(out, "{:<28}{:>14.4}", "F-statistic", self.f_statistic);
        let _ = writeln!(out, "{:<28}{:>14}", "N of cases", self.n_cases);
        out.push_str("* p <= 0.05, ** p <= 0.01, *** p <= 0.001\n");
        out
    }
}

/// Cholesky factor `L` of a symmetric matrix, or `RankDeficient` when a pivot
/// collapses relative to the diagonal scale.
fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                // also catches NaN
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(d > scale * 1e-12) {
                    return Err(Error::RankDeficient);
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

/// OLS with an intercept via the normal equations. `columns` holds one
/// vector per predictor, each the same length as `y`.
pub fn ols_multi(names: &[&str], columns: &[Vec<f64>], y: &[f64], outcome_label: &str) -> Result<RegressionReport> {
    let k = columns.len();
    let n = y.len();
    if names.len() != k {
        return Err(Error::LengthMismatch { left: names.len(), right: k });
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch { left: c.len(), right: n });
    }
    if n < k + 2 {
        return Err(Error::TooFew { needed: k + 2, got: n });
    }
    let p = k + 1;
    let row = |i: usize| std::iter::once(1.0).chain(columns.iter().map(move |c| c[i]));
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        let x: Vec<f64> = row(i).collect();
        for a in 0..p {
            xty[a] += x[a] * y[i];
            for b in 0..=a {
                xtx[a][b] += x[a] * x[b];
            }
        }
    }
    for a in 0..p {
        for b in a + 1..p {
            xtx[a][b] = xtx[b][a];
        }
    }
    let l = cholesky(&xtx)?;
    let beta = cholesky_solve(&l, &xty);

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let (mut rss, mut tss) = (0.0, 0.0);
    for (i, yi) in y.iter().enumerate() {
        let fit: f64 = row(i).zip(&beta).map(|(x, b)| x * b).sum();
        rss += (yi - fit).powi(2);
        tss += (yi - y_mean).powi(2);
    }
    let df_resid = (n - p) as f64;
    let sigma2 = rss / df_resid;
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    let f_statistic = (r_squared / k as f64) / ((1.0 - r_squared) / df_resid);

    let mut coefficients = Vec::with_capacity(p);
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        let var = cholesky_solve(&l, &e)[j] * sigma2;
        let std_error = var.max(0.0).sqrt();
        let estimate = beta[j];
        let t = if std_error > 0.0 {
            estimate / std_error
        } else if estimate == 0.0 {
            0.0
        } else {
            estimate.signum() * f64::INFINITY
        };
        let p_value = student_t_two_sided(t, df_resid);
        coefficients.push(Coefficient {
            predictor: if j == 0 { "(intercept)".to_string() } else { names[j - 1].to_string() },
            estimate,
            std_error,
            t,
            p: p_value,
            stars: Stars::from_p(p_value),
        });
    }
    Ok(RegressionReport {
        outcome_label: outcome_label.to_string(),
        coefficients,
        r_squared,
        f_statistic,
        n_cases: n,
    })
}

/// Regresses the chosen outcome on the four stereotype predictors.
pub fn regress(rows: &[EndorsementRow], outcome: Outcome, votes: VotesScale) -> Result<RegressionReport> {
    let columns = vec![
        rows.iter().map(|r| f64::from(r.male_lead)).collect(),
        rows.iter().map(|r| r.n_cooccur as f64).collect(),
        rows.iter().map(|r| r.female_increase).collect(),
        rows.iter().map(|r| r.male_increase).collect(),
    ];
    let (y, label): (Vec<f64>, &str) = match (outcome, votes) {
        (Outcome::Rating, _) => (rows.iter().map(|r| r.rating).collect(), "rating"),
        (Outcome::Votes, VotesScale::Log) => (rows.iter().map(|r| (r.votes as f64).ln()).collect(), "ln(votes)"),
        (Outcome::Votes, VotesScale::Raw) => (rows.iter().map(|r| r.votes as f64).collect(), "votes"),
    };
    ols_multi(&PREDICTORS, &columns, &y, label)
}
