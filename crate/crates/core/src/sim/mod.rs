//! Monte Carlo simulation of coded random access with successive
//! interference cancellation across slots.

mod oracle;

pub use oracle::{exhaustive_sic_oracle, ORACLE_PACKET_LIMIT};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capture::CaptureParams;
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::numeric::fmt_sig;

pub const DEFAULT_MAX_ROUNDS: u32 = 100;

/// Largest number of receivers sharing one slot.
pub const MAX_RECEIVERS_PER_SLOT: u32 = 64;

fn default_max_rounds() -> u32 {
    DEFAULT_MAX_ROUNDS
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub slots: u32,
    pub classes: Vec<ClassSpec>,
    pub slot_model: SlotModel,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub users: u32,
    pub placement: Placement,
    #[serde(default)]
    pub receiver: ReceiverChoice,
}

/// Where a user's replicas go.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Draw a replica count from `degree`, then a uniform slot for each
    /// replica independently, so two replicas may share a slot. With
    /// `distinct_slots` the slots are drawn without replacement instead.
    Uniform {
        degree: DegreeDistribution,
        #[serde(default)]
        distinct_slots: bool,
    },
    /// A single packet in one uniformly chosen slot.
    Scheduled,
    /// One replica in each listed slot.
    Fixed { slots: Vec<u32> },
}

/// Which of the receivers in a slot hear a replica.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverChoice {
    #[default]
    All,
    /// One receiver, chosen uniformly per replica.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlotModel {
    /// `receivers` cooperating D-fold receivers per slot. With more than one
    /// receiver the slot is decoded by cancellation between its receivers.
    DFold {
        d: u32,
        #[serde(default = "one")]
        receivers: u32,
    },
    /// One receiver per slot with Rayleigh fading, capture and cancellation.
    /// Gains are drawn once per replica. SNR and threshold are in dB.
    RayleighCapture { gamma_db: f64, threshold_db: f64 },
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::InvalidParameter("at least one slot is required".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
        }
        if self.classes.is_empty() {
            return Err(Error::InvalidParameter("at least one class is required".into()));
        }
        match &self.slot_model {
            SlotModel::DFold { d, receivers } => {
                if *d == 0 {
                    return Err(Error::InvalidParameter("D must be at least 1".into()));
                }
                if *receivers == 0 || *receivers > MAX_RECEIVERS_PER_SLOT {
                    return Err(Error::InvalidParameter(format!(
                        "receivers per slot must be between 1 and {MAX_RECEIVERS_PER_SLOT}"
                    )));
                }
            }
            SlotModel::RayleighCapture { gamma_db, threshold_db } => {
                CaptureParams::from_db(*gamma_db, *threshold_db)?;
            }
        }
        for class in &self.classes {
            if let Placement::Uniform { degree, distinct_slots: true } = &class.placement {
                if degree.max_degree() > self.slots as usize {
                    return Err(Error::InvalidParameter(format!(
                        "{} distinct slots requested out of {}",
                        degree.max_degree(),
                        self.slots
                    )));
                }
            }
            if let Placement::Fixed { slots } = &class.placement {
                if let Some(bad) = slots.iter().find(|&&s| s >= self.slots) {
                    return Err(Error::InvalidParameter(format!("slot {bad} is out of range")));
                }
            }
        }
        Ok(())
    }

    fn receivers_per_slot(&self) -> u32 {
        match self.slot_model {
            SlotModel::DFold { receivers, .. } => receivers,
            SlotModel::RayleighCapture { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub packets: u64,
    pub decoded: u64,
}

impl ClassStats {
    pub fn errors(&self) -> u64 {
        self.packets - self.decoded
    }

    pub fn error_rate(&self) -> f64 {
        if self.packets == 0 {
            0.0
        } else {
            self.errors() as f64 / self.packets as f64
        }
    }

    /// `sqrt(p (1 - p) / packets)` for the estimated error rate `p`.
    pub fn std_err(&self) -> f64 {
        if self.packets == 0 {
            return 0.0;
        }
        let p = self.error_rate();
        (p * (1.0 - p) / self.packets as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub runs: u64,
    pub classes: Vec<ClassStats>,
}

impl RunStats {
    pub fn error_rates(&self) -> Vec<f64> {
        self.classes.iter().map(ClassStats::error_rate).collect()
    }

    pub fn std_errs(&self) -> Vec<f64> {
        self.classes.iter().map(ClassStats::std_err).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,errors,trials,error_rate,std_err\n");
        for (k, c) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                k + 1,
                c.errors(),
                c.packets,
                fmt_sig(c.error_rate()),
                fmt_sig(c.std_err())
            ));
        }
        out
    }
}

/// All residual packets decode iff there are at most `d` of them.
pub fn decode_slot_dfold<T: Copy>(residual: &[T], d: u32) -> Vec<T> {
    if residual.len() <= d as usize {
        residual.to_vec()
    } else {
        Vec::new()
    }
}

/// Strongest-first capture: while the strongest residual signal `x` satisfies
/// `x / (interference + 1/gamma) >= threshold` it is decoded and cancelled,
/// together with any other copy of the same packet in the slot.
pub fn decode_slot_capture<T: Copy + PartialEq>(residual: &[(T, f64)], gamma: f64, threshold: f64) -> Vec<T> {
    let mut order: Vec<(T, f64)> = residual.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut alive = vec![true; order.len()];
    let mut decoded = Vec::new();
    let noise = 1.0 / gamma;
    for i in 0..order.len() {
        if !alive[i] {
            continue;
        }
        let (id, x) = order[i];
        let interference: f64 = (i + 1..order.len()).filter(|&j| alive[j]).map(|j| order[j].1).sum();
        if x < threshold * (interference + noise) {
            break;
        }
        decoded.push(id);
        for j in i..order.len() {
            if order[j].0 == id {
                alive[j] = false;
            }
        }
    }
    decoded
}

/// Receiver index meaning "heard by every receiver in the slot".
pub const ALL_RECEIVERS: u8 = u8::MAX;

/// Cancellation between `receivers` D-fold receivers sharing a slot. Each
/// entry is a packet id and the receiver that hears it, or [`ALL_RECEIVERS`].
pub fn decode_slot_cooperative<T: Copy + PartialEq>(residual: &[(T, u8)], d: u32, receivers: u32) -> Vec<T> {
    if receivers <= 1 {
        return decode_slot_dfold(residual, d).into_iter().map(|(id, _)| id).collect();
    }
    let mut alive = vec![true; residual.len()];
    let mut decoded: Vec<T> = Vec::new();
    loop {
        let mut progress = false;
        for r in 0..receivers as u8 {
            let heard = |j: usize| alive[j] && (residual[j].1 == ALL_RECEIVERS || residual[j].1 == r);
            let count = (0..residual.len()).filter(|&j| heard(j)).count();
            if count == 0 || count > d as usize {
                continue;
            }
            let ids: Vec<T> = (0..residual.len()).filter(|&j| heard(j)).map(|j| residual[j].0).collect();
            for id in ids {
                if !decoded.contains(&id) {
                    decoded.push(id);
                }
                for j in 0..residual.len() {
                    if residual[j].0 == id {
                        alive[j] = false;
                    }
                }
            }
            progress = true;
        }
        if !progress {
            return decoded;
        }
    }
}

/// Per-class state prepared once per simulation.
struct PreparedClass {
    users: u32,
    placement: Placement,
    receiver: ReceiverChoice,
    degree: Option<WeightedIndex<f64>>,
}

struct Prepared<'a> {
    scenario: &'a Scenario,
    classes: Vec<PreparedClass>,
    capture: Option<CaptureParams>,
    receivers: u32,
}

impl<'a> Prepared<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        let classes = scenario
            .classes
            .iter()
            .map(|c| {
                let degree = match &c.placement {
                    Placement::Uniform { degree, .. } => Some(
                        WeightedIndex::new(degree.coefficients().iter().copied())
                            .map_err(|e| Error::InvalidDegree(e.to_string()))?,
                    ),
                    _ => None,
                };
                Ok(PreparedClass { users: c.users, placement: c.placement.clone(), receiver: c.receiver, degree })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Prepared {
            scenario,
            classes,
            capture: match scenario.slot_model {
                SlotModel::RayleighCapture { gamma_db, threshold_db } => {
                    Some(CaptureParams::from_db(gamma_db, threshold_db)?)
                }
                SlotModel::DFold { .. } => None,
            },
            receivers: scenario.receivers_per_slot(),
        })
    }
}

/// Buffers reused across runs on one worker.
#[derive(Default)]
struct Scratch {
    user_class: Vec<u32>,
    user_start: Vec<u32>,
    rep_user: Vec<u32>,
    rep_slot: Vec<u32>,
    rep_recv: Vec<u8>,
    rep_gain: Vec<f64>,
    slot_start: Vec<u32>,
    slot_reps: Vec<u32>,
    decoded: Vec<bool>,
    dirty: Vec<bool>,
    newly: Vec<u32>,
    cur_dfold: Vec<(u32, u8)>,
    cur_capture: Vec<(u32, f64)>,
}

impl Scratch {
    fn place(&mut self, prep: &Prepared<'_>, rng: &mut ChaCha8Rng) {
        let t = prep.scenario.slots;
        self.user_class.clear();
        self.user_start.clear();
        self.rep_user.clear();
        self.rep_slot.clear();
        self.rep_recv.clear();
        self.rep_gain.clear();
        let mut user = 0u32;
        for (k, class) in prep.classes.iter().enumerate() {
            for _ in 0..class.users {
                self.user_class.push(k as u32);
                self.user_start.push(self.rep_user.len() as u32);
                let push = |slot: u32, rng: &mut ChaCha8Rng, s: &mut Scratch| {
                    let recv = match class.receiver {
                        ReceiverChoice::Random if prep.receivers > 1 => rng.random_range(0..prep.receivers) as u8,
                        _ => ALL_RECEIVERS,
                    };
                    let gain = if prep.capture.is_some() { rng.sample(Exp1) } else { 0.0 };
                    s.rep_user.push(user);
                    s.rep_slot.push(slot);
                    s.rep_recv.push(recv);
                    s.rep_gain.push(gain);
                };
                match &class.placement {
                    Placement::Uniform { distinct_slots, .. } => {
                        let l = class.degree.as_ref().expect("uniform class has a degree sampler").sample(rng);
                        let first = self.rep_slot.len();
                        for _ in 0..l {
                            let mut slot = rng.random_range(0..t);
                            while *distinct_slots && self.rep_slot[first..].contains(&slot) {
                                slot = rng.random_range(0..t);
                            }
                            push(slot, rng, self);
                        }
                    }
                    Placement::Scheduled => {
                        let slot = rng.random_range(0..t);
                        push(slot, rng, self);
                    }
                    Placement::Fixed { slots } => {
                        for &slot in slots {
                            push(slot, rng, self);
                        }
                    }
                }
                user += 1;
            }
        }
        self.user_start.push(self.rep_user.len() as u32);

        // Bucket replicas by slot.
        self.slot_start.clear();
        self.slot_start.resize(t as usize + 1, 0);
        for &s in &self.rep_slot {
            self.slot_start[s as usize + 1] += 1;
        }
        for i in 0..t as usize {
            self.slot_start[i + 1] += self.slot_start[i];
        }
        self.slot_reps.clear();
        self.slot_reps.resize(self.rep_slot.len(), 0);
        let mut fill: Vec<u32> = self.slot_start[..t as usize].to_vec();
        for (rep, &s) in self.rep_slot.iter().enumerate() {
            self.slot_reps[fill[s as usize] as usize] = rep as u32;
            fill[s as usize] += 1;
        }
    }

    fn decode_slot(&mut self, prep: &Prepared<'_>, slot: usize) {
        let reps = &self.slot_reps[self.slot_start[slot] as usize..self.slot_start[slot + 1] as usize];
        match (&prep.scenario.slot_model, prep.capture) {
            (&SlotModel::DFold { d, receivers }, _) => {
                self.cur_dfold.clear();
                for &rep in reps {
                    let u = self.rep_user[rep as usize];
                    if !self.decoded[u as usize] {
                        self.cur_dfold.push((u, self.rep_recv[rep as usize]));
                    }
                }
                if !self.cur_dfold.is_empty() {
                    self.newly.extend(decode_slot_cooperative(&self.cur_dfold, d, receivers));
                }
            }
            (SlotModel::RayleighCapture { .. }, Some(p)) => {
                self.cur_capture.clear();
                for &rep in reps {
                    let u = self.rep_user[rep as usize];
                    if !self.decoded[u as usize] {
                        self.cur_capture.push((u, self.rep_gain[rep as usize]));
                    }
                }
                if !self.cur_capture.is_empty() {
                    self.newly.extend(decode_slot_capture(&self.cur_capture, p.gamma, p.threshold));
                }
            }
            (SlotModel::RayleighCapture { .. }, None) => unreachable!("capture parameters are prepared"),
        }
    }

    /// Synchronous rounds: every slot is decoded against the residual packets
    /// of the previous round, then all replicas of newly decoded packets are
    /// removed everywhere. Slots whose residual set did not change are skipped
    /// since they cannot decode anything new.
    fn peel(&mut self, prep: &Prepared<'_>, mut trace: Option<&mut Vec<u64>>) {
        let t = prep.scenario.slots as usize;
        self.decoded.clear();
        self.decoded.resize(self.user_class.len(), false);
        self.dirty.clear();
        self.dirty.resize(t, true);
        let mut total = 0u64;
        for _ in 0..prep.scenario.max_rounds {
            self.newly.clear();
            for slot in 0..t {
                if std::mem::take(&mut self.dirty[slot]) {
                    self.decode_slot(prep, slot);
                }
            }
            if self.newly.is_empty() {
                break;
            }
            for i in 0..self.newly.len() {
                let u = self.newly[i] as usize;
                if self.decoded[u] {
                    continue;
                }
                self.decoded[u] = true;
                total += 1;
                for rep in self.user_start[u]..self.user_start[u + 1] {
                    self.dirty[self.rep_slot[rep as usize] as usize] = true;
                }
            }
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(total);
            }
        }
    }

    fn run(&mut self, prep: &Prepared<'_>, run: u64, acc: &mut [ClassStats]) {
        let mut rng = ChaCha8Rng::seed_from_u64(prep.scenario.seed);
        rng.set_stream(run);
        self.place(prep, &mut rng);
        self.peel(prep, None);
        for (u, &k) in self.user_class.iter().enumerate() {
            acc[k as usize].packets += 1;
            if self.decoded[u] {
                acc[k as usize].decoded += 1;
            }
        }
    }
}

fn merge(mut a: Vec<ClassStats>, b: Vec<ClassStats>) -> Vec<ClassStats> {
    for (x, y) in a.iter_mut().zip(b) {
        x.packets += y.packets;
        x.decoded += y.decoded;
    }
    a
}

/// Simulates `runs` independent frames on the current rayon pool. Run `i`
/// uses stream `i` of a ChaCha8 generator seeded with the scenario seed, so
/// the result does not depend on the number of workers.
pub fn simulate(scenario: &Scenario, runs: u64) -> Result<RunStats> {
    if runs == 0 {
        return Err(Error::InvalidParameter("at least one run is required".into()));
    }
    let prep = Prepared::new(scenario)?;
    let k = scenario.classes.len();
    let classes = (0..runs)
        .into_par_iter()
        .fold(
            || (Scratch::default(), vec![ClassStats::default(); k]),
            |(mut scratch, mut acc), run| {
                scratch.run(&prep, run, &mut acc);
                (scratch, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(|| vec![ClassStats::default(); k], merge);
    Ok(RunStats { runs, classes })
}

/// [`simulate`] on a dedicated pool of `workers` threads.
pub fn simulate_with_workers(scenario: &Scenario, runs: u64, workers: usize) -> Result<RunStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| simulate(scenario, runs))
}

/// Cumulative number of decoded packets after each round of a single run
/// that decoded something.
pub fn trace_run(scenario: &Scenario, run: u64) -> Result<Vec<u64>> {
    let prep = Prepared::new(scenario)?;
    let mut scratch = Scratch::default();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(run);
    scratch.place(&prep, &mut rng);
    let mut counts = Vec::new();
    scratch.peel(&prep, Some(&mut counts));
    Ok(counts)
}
