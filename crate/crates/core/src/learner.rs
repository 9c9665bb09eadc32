//! Attempt log, credit assignment, Rasch estimation, adaptive sampling and
//! placement.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructs::{CefrLevel, ConstructDef};

pub const MAX_ITERATIONS: usize = 200;
pub const TOLERANCE: f64 = 1e-4;
pub const PENALTY_WEIGHT: f64 = 0.5;
pub const PLACEMENT_ITEMS: usize = 20;
pub const PLACEMENT_SE: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("unknown exercise `{0}`")]
    UnknownExercise(String),
    #[error("attempt {ordinal} on `{exercise}` is out of order")]
    OutOfOrderAttempt { exercise: String, ordinal: u32 },
    #[error("exercise `{0}` is already closed")]
    ExerciseClosed(String),
    #[error("no observations to estimate from")]
    Degenerate,
    #[error("exercise pool is empty")]
    EmptyPool,
    #[error("construct `{0}` has no CEFR level")]
    NoLevel(String),
    #[error("placement bank is empty")]
    EmptyBank,
    #[error("unknown learner `{0}`")]
    UnknownLearner(String),
    #[error("malformed log line {line}: {message}")]
    MalformedLog { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptKind {
    Answer,
    HintRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptEvent {
    pub learner: String,
    pub exercise: String,
    pub constructs: Vec<String>,
    pub ordinal: u32,
    pub kind: AttemptKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    /// Hints shown so far on this exercise, including any this event caused.
    pub hints: u32,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructObservation {
    pub learner: String,
    pub construct: String,
    pub outcome: bool,
    pub weight: f64,
}

/// Credit weight for a final outcome after `hints` hints.
pub fn credit_weight(hints: u32) -> f64 {
    (1.0 - 0.2 * f64::from(hints)).max(0.2)
}

/// One line of the persisted log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Exercise { id: String, constructs: Vec<String> },
    Attempt(AttemptEvent),
}

#[derive(Debug, Clone, Default)]
struct ExerciseState {
    last_ordinal: Option<u32>,
    wrong: u32,
    requests: u32,
    closed: bool,
}

impl ExerciseState {
    fn hearts(&self) -> u32 {
        5u32.saturating_sub(self.wrong + self.requests)
    }
}

/// Append-only attempt log with derived observations.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    records: Vec<LogRecord>,
    exercises: BTreeMap<String, Vec<String>>,
    state: BTreeMap<(String, String), ExerciseState>,
    observations: Vec<ConstructObservation>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_exercise(&mut self, id: &str, constructs: &[String]) {
        if self.exercises.contains_key(id) {
            return;
        }
        self.exercises.insert(id.to_string(), constructs.to_vec());
        self.records.push(LogRecord::Exercise {
            id: id.to_string(),
            constructs: constructs.to_vec(),
        });
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn observations(&self) -> &[ConstructObservation] {
        &self.observations
    }

    pub fn hearts(&self, learner: &str, exercise: &str) -> u32 {
        self.state
            .get(&(learner.to_string(), exercise.to_string()))
            .map_or(5, ExerciseState::hearts)
    }

    pub fn is_closed(&self, learner: &str, exercise: &str) -> bool {
        self.state
            .get(&(learner.to_string(), exercise.to_string()))
            .is_some_and(|s| s.closed)
    }

    /// Appends an event and returns the observations it produces: a 0.5
    /// penalty per construct for an intermediate wrong answer, and a
    /// hint-discounted outcome per construct when the exercise closes
    /// (correct answer, or the wrong answer that spends the last heart).
    pub fn record_attempt(
        &mut self,
        event: AttemptEvent,
    ) -> Result<Vec<ConstructObservation>, LearnerError> {
        let constructs = self
            .exercises
            .get(&event.exercise)
            .ok_or_else(|| LearnerError::UnknownExercise(event.exercise.clone()))?
            .clone();
        let key = (event.learner.clone(), event.exercise.clone());
        let st = self.state.entry(key).or_default();
        if st.closed {
            return Err(LearnerError::ExerciseClosed(event.exercise.clone()));
        }
        if st.last_ordinal.is_some_and(|o| event.ordinal <= o) || event.hints > 5 {
            return Err(LearnerError::OutOfOrderAttempt {
                exercise: event.exercise.clone(),
                ordinal: event.ordinal,
            });
        }
        st.last_ordinal = Some(event.ordinal);
        let obs = |outcome: bool, weight: f64| -> Vec<ConstructObservation> {
            constructs
                .iter()
                .map(|c| ConstructObservation {
                    learner: event.learner.clone(),
                    construct: c.clone(),
                    outcome,
                    weight,
                })
                .collect()
        };
        let out = match (event.kind, event.correct) {
            (AttemptKind::HintRequest, _) => {
                st.requests += 1;
                Vec::new()
            }
            (AttemptKind::Answer, Some(true)) => {
                st.closed = true;
                obs(true, credit_weight(event.hints))
            }
            (AttemptKind::Answer, _) => {
                st.wrong += 1;
                if st.hearts() == 0 {
                    st.closed = true;
                    obs(false, credit_weight(event.hints))
                } else {
                    obs(false, PENALTY_WEIGHT)
                }
            }
        };
        self.observations.extend(out.iter().cloned());
        self.records.push(LogRecord::Attempt(event));
        Ok(out)
    }

    pub fn to_ndjson(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("log records serialize") + "\n")
            .collect()
    }

    /// Rebuilds a log by replaying every record in order.
    pub fn from_ndjson(text: &str) -> Result<Self, LearnerError> {
        let mut log = EventLog::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let rec: LogRecord =
                serde_json::from_str(line).map_err(|e| LearnerError::MalformedLog {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            log.apply(rec)?;
        }
        Ok(log)
    }

    pub fn apply(&mut self, record: LogRecord) -> Result<Vec<ConstructObservation>, LearnerError> {
        match record {
            LogRecord::Exercise { id, constructs } => {
                self.register_exercise(&id, &constructs);
                Ok(Vec::new())
            }
            LogRecord::Attempt(e) => self.record_attempt(e),
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Rasch fit for all learners and constructs seen in the observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillState {
    pub abilities: BTreeMap<String, f64>,
    pub difficulties: BTreeMap<String, f64>,
    pub ability_se: BTreeMap<String, f64>,
    pub difficulty_se: BTreeMap<String, f64>,
    pub iterations: usize,
    pub log_likelihood: f64,
}

impl SkillState {
    /// Prior-mean ability for learners absent from the fit.
    pub fn ability(&self, learner: &str) -> f64 {
        self.abilities.get(learner).copied().unwrap_or(0.0)
    }

    /// Estimated difficulty, or the fallback for constructs without data.
    pub fn difficulty(
        &self,
        construct: &str,
        fallback: impl Fn(&str) -> Option<f64>,
    ) -> Option<f64> {
        self.difficulties
            .get(construct)
            .copied()
            .or_else(|| fallback(construct))
    }

    /// P(correct) against the hardest linked construct; `None` when no
    /// linked construct has a difficulty.
    pub fn p_correct(
        &self,
        learner: &str,
        constructs: &[String],
        fallback: impl Fn(&str) -> Option<f64>,
    ) -> Option<f64> {
        let b = constructs
            .iter()
            .filter_map(|c| self.difficulty(c, &fallback))
            .fold(None, |m: Option<f64>, b| Some(m.map_or(b, |m| m.max(b))))?;
        Some(p_correct(self.ability(learner), &[b]))
    }
}

/// Logistic of θ minus the largest difficulty.
pub fn p_correct(theta: f64, difficulties: &[f64]) -> f64 {
    let b = difficulties
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    logistic(theta - b)
}

/// Weighted Rasch MAP fit with N(0, 1) priors on θ and b by coordinate
/// Newton ascent; difficulties are then shifted to mean zero, with
/// abilities shifted alike so θ − b is preserved.
pub fn estimate(observations: &[ConstructObservation]) -> Result<SkillState, LearnerError> {
    if observations.is_empty() {
        return Err(LearnerError::Degenerate);
    }
    let mut learners: BTreeMap<&str, usize> = BTreeMap::new();
    let mut constructs: BTreeMap<&str, usize> = BTreeMap::new();
    for o in observations {
        let n = learners.len();
        learners.entry(&o.learner).or_insert(n);
        let n = constructs.len();
        constructs.entry(&o.construct).or_insert(n);
    }
    let data: Vec<(usize, usize, f64, f64)> = observations
        .iter()
        .map(|o| {
            (
                learners[o.learner.as_str()],
                constructs[o.construct.as_str()],
                f64::from(u8::from(o.outcome)),
                o.weight,
            )
        })
        .collect();
    let mut by_learner = vec![Vec::new(); learners.len()];
    let mut by_construct = vec![Vec::new(); constructs.len()];
    for (k, &(l, c, _, _)) in data.iter().enumerate() {
        by_learner[l].push(k);
        by_construct[c].push(k);
    }
    let mut theta = vec![0.0; learners.len()];
    let mut b = vec![0.0; constructs.len()];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for (l, rows) in by_learner.iter().enumerate() {
            let (mut g, mut h) = (-theta[l], 1.0);
            for &k in rows {
                let (_, c, y, w) = data[k];
                let p = logistic(theta[l] - b[c]);
                g += w * (y - p);
                h += w * p * (1.0 - p);
            }
            theta[l] += g / h;
            delta = delta.max((g / h).abs());
        }
        for (c, rows) in by_construct.iter().enumerate() {
            let (mut g, mut h) = (-b[c], 1.0);
            for &k in rows {
                let (l, _, y, w) = data[k];
                let p = logistic(theta[l] - b[c]);
                g -= w * (y - p);
                h += w * p * (1.0 - p);
            }
            b[c] += g / h;
            delta = delta.max((g / h).abs());
        }
        if delta < TOLERANCE {
            break;
        }
    }
    let mut theta_info = vec![1.0; theta.len()];
    let mut b_info = vec![1.0; b.len()];
    let mut log_likelihood = 0.0;
    for &(l, c, y, w) in &data {
        let p = logistic(theta[l] - b[c]);
        theta_info[l] += w * p * (1.0 - p);
        b_info[c] += w * p * (1.0 - p);
        log_likelihood += w * (y * p.ln() + (1.0 - y) * (1.0 - p).ln());
    }
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    let name = |m: &BTreeMap<&str, usize>, vals: &[f64]| -> BTreeMap<String, f64> {
        m.iter().map(|(k, &i)| (k.to_string(), vals[i])).collect()
    };
    let shifted_t: Vec<f64> = theta.iter().map(|t| t - mean).collect();
    let shifted_b: Vec<f64> = b.iter().map(|x| x - mean).collect();
    let se = |info: &[f64]| info.iter().map(|i| 1.0 / i.sqrt()).collect::<Vec<_>>();
    Ok(SkillState {
        abilities: name(&learners, &shifted_t),
        difficulties: name(&constructs, &shifted_b),
        ability_se: name(&learners, &se(&theta_info)),
        difficulty_se: name(&constructs, &se(&b_info)),
        iterations,
        log_likelihood,
    })
}

/// CEFR level to logit difficulty: A1 −2.5 through C2 2.5 in unit steps.
pub fn cefr_value(level: CefrLevel) -> f64 {
    let i = CefrLevel::ALL.iter().position(|&l| l == level).unwrap() as f64;
    i - 2.5
}

pub fn cefr_fallback(construct: &ConstructDef) -> Result<f64, LearnerError> {
    construct
        .cefr
        .map(cefr_value)
        .ok_or_else(|| LearnerError::NoLevel(construct.id.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub target: f64,
    pub spread: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            target: 0.5,
            spread: 0.15,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn weight(&self, p: f64) -> f64 {
        (-(p - self.target).powi(2) / (2.0 * self.spread * self.spread)).exp()
    }
}

/// Draws an index with probability proportional to the Gaussian kernel of
/// each success probability around the target.
pub fn sample_index(
    probabilities: &[f64],
    config: &SamplerConfig,
    rng: &mut impl Rng,
) -> Result<usize, LearnerError> {
    if probabilities.is_empty() {
        return Err(LearnerError::EmptyPool);
    }
    let weights: Vec<f64> = probabilities.iter().map(|&p| config.weight(p)).collect();
    match WeightedIndex::new(&weights) {
        Ok(dist) => Ok(dist.sample(rng)),
        // every weight underflowed: fall back to uniform
        Err(_) => Ok(rng.random_range(0..probabilities.len())),
    }
}

/// Picks one exercise from `pool`, given each one's linked constructs.
/// Exercises whose constructs all lack a difficulty are skipped.
pub fn sample_exercise<'a, T>(
    pool: &'a [T],
    constructs_of: impl Fn(&T) -> &[String],
    learner: &str,
    state: &SkillState,
    fallback: impl Fn(&str) -> Option<f64>,
    config: &SamplerConfig,
    rng: &mut impl Rng,
) -> Result<&'a T, LearnerError> {
    let (items, ps): (Vec<&T>, Vec<f64>) = pool
        .iter()
        .filter_map(|e| {
            state
                .p_correct(learner, constructs_of(e), &fallback)
                .map(|p| (e, p))
        })
        .unzip();
    let i = sample_index(&ps, config, rng)?;
    Ok(items[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementItem {
    pub id: String,
    pub difficulty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PlacementStep {
    Next {
        item: PlacementItem,
        theta: f64,
        se: f64,
    },
    Finished {
        theta: f64,
        se: f64,
    },
}

/// MAP ability with a N(0, 1) prior from responses to items of known
/// difficulty, and its standard error.
pub fn ability_map(responses: &[(f64, bool)]) -> (f64, f64) {
    let mut theta = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let (mut g, mut h) = (-theta, 1.0);
        for &(b, y) in responses {
            let p = logistic(theta - b);
            g += f64::from(u8::from(y)) - p;
            h += p * (1.0 - p);
        }
        theta += g / h;
        if (g / h).abs() < TOLERANCE {
            break;
        }
    }
    let info: f64 = 1.0
        + responses
            .iter()
            .map(|&(b, _)| {
                let p = logistic(theta - b);
                p * (1.0 - p)
            })
            .sum::<f64>();
    (theta, 1.0 / info.sqrt())
}

/// Next placement item: the unanswered item closest in difficulty to the
/// current estimate. Finished after 20 responses, once the standard error
/// drops below 0.4, or when the bank runs out.
pub fn placement_next(
    bank: &[PlacementItem],
    responses: &[(String, bool)],
) -> Result<PlacementStep, LearnerError> {
    if bank.is_empty() {
        return Err(LearnerError::EmptyBank);
    }
    let scored: Vec<(f64, bool)> = responses
        .iter()
        .filter_map(|(id, y)| {
            bank.iter()
                .find(|i| &i.id == id)
                .map(|i| (i.difficulty, *y))
        })
        .collect();
    let (theta, se) = ability_map(&scored);
    if responses.len() >= PLACEMENT_ITEMS || se < PLACEMENT_SE {
        return Ok(PlacementStep::Finished { theta, se });
    }
    let next = bank
        .iter()
        .filter(|i| !responses.iter().any(|(id, _)| *id == i.id))
        .min_by(|a, b| {
            (a.difficulty - theta)
                .abs()
                .total_cmp(&(b.difficulty - theta).abs())
        });
    Ok(match next {
        Some(item) => PlacementStep::Next {
            item: item.clone(),
            theta,
            se,
        },
        None => PlacementStep::Finished { theta, se },
    })
}

pub const TREND_WINDOW: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructProgress {
    pub construct: String,
    pub observations: usize,
    pub correct: usize,
    pub weighted_rate: f64,
    /// Weighted rate over the last 20 observations.
    pub recent_rate: f64,
    /// `recent_rate − weighted_rate`; positive means improving.
    pub trend: f64,
    pub p_correct: Option<f64>,
}

fn weighted_rate<'a>(obs: impl Iterator<Item = &'a ConstructObservation>) -> f64 {
    let (num, den) = obs.fold((0.0, 0.0), |(n, d), o| {
        (n + if o.outcome { o.weight } else { 0.0 }, d + o.weight)
    });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Per-construct summary of one learner's observations, sorted by construct id.
pub fn progress_report(
    learner: &str,
    state: Option<&SkillState>,
    observations: &[ConstructObservation],
    fallback: impl Fn(&str) -> Option<f64>,
) -> Vec<ConstructProgress> {
    let mut by: BTreeMap<&str, Vec<&ConstructObservation>> = BTreeMap::new();
    for o in observations.iter().filter(|o| o.learner == learner) {
        by.entry(&o.construct).or_default().push(o);
    }
    by.into_iter()
        .map(|(c, obs)| {
            let rate = weighted_rate(obs.iter().copied());
            let recent = weighted_rate(obs.iter().rev().take(TREND_WINDOW).copied());
            ConstructProgress {
                construct: c.to_string(),
                observations: obs.len(),
                correct: obs.iter().filter(|o| o.outcome).count(),
                weighted_rate: rate,
                recent_rate: recent,
                trend: recent - rate,
                p_correct: state.and_then(|s| s.p_correct(learner, &[c.to_string()], &fallback)),
            }
        })
        .collect()
}

/// Pearson correlation; 0 when either side has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
