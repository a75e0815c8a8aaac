use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use super::events::EventTiming;
use super::herald::{herald_from_deviation, Detector, HeraldResult, RejectReason, TimeBin};
use super::NoiseParams;
use crate::event_stream::TimeTagRecord;
use crate::physics::{window_stats, NodeId, NodeSpec, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayBranch {
    /// No excitation this attempt.
    None,
    /// σ decay back to |↓⟩, entangled with the photon.
    Sigma,
    /// π decay into the wrong ground state |X⟩.
    Pi,
    /// Decay into D3/2; no 493 nm photon.
    DLeak,
}

/// What happened at one node in one attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeOutcome {
    pub node: NodeId,
    /// Bin of the excitation pulse that excited the ion, if any.
    pub bin: Option<TimeBin>,
    pub branch: DecayBranch,
    /// Photon survived polarizer, optics and detector.
    pub detected: bool,
    /// Delay between excitation and detection, drawn from Exp(τ_R).
    pub arrival_offset_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionSource {
    Photon(NodeId),
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub bin: TimeBin,
    pub detector: Detector,
    /// Delay after the bin's excitation mark.
    pub offset_s: f64,
    pub source: DetectionSource,
}

/// Ground truth behind an accepted coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeraldOrigin {
    Genuine,
    /// At least one node decayed on the π branch.
    PiLeak,
    /// At least one of the two clicks was a dark count.
    DarkCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttemptOutcome {
    pub nodes: [NodeOutcome; 2],
    pub detections: Vec<Detection>,
    pub herald: HeraldResult,
    /// Late-minus-early arrival offset for one-early-one-late attempts.
    pub deviation_s: Option<f64>,
    pub origin: Option<HeraldOrigin>,
}

fn simulate_node<R: Rng + ?Sized>(node: &NodeSpec, exp: &Exp<f64>, rng: &mut R) -> NodeOutcome {
    let bin = if rng.random_bool(0.5) { TimeBin::Early } else { TimeBin::Late };
    let e = &node.emitter;
    if !rng.random_bool(e.p_exc) {
        return NodeOutcome {
            node: node.id,
            bin: None,
            branch: DecayBranch::None,
            detected: false,
            arrival_offset_s: 0.0,
        };
    }
    let u: f64 = rng.random();
    let branch = if u < e.branch_sigma {
        DecayBranch::Sigma
    } else if u < e.branch_sigma + e.branch_pi {
        DecayBranch::Pi
    } else {
        DecayBranch::DLeak
    };
    let transmitted = match branch {
        DecayBranch::Sigma => true,
        DecayBranch::Pi => !rng.random_bool(e.pol_rejection),
        _ => false,
    };
    let detected = transmitted && rng.random_bool(node.chain.efficiency());
    let arrival_offset_s = if detected { exp.sample(rng) } else { 0.0 };
    NodeOutcome {
        node: node.id,
        bin: Some(bin),
        branch,
        detected,
        arrival_offset_s,
    }
}

fn random_detector<R: Rng + ?Sized>(rng: &mut R) -> Detector {
    if rng.random_bool(0.5) {
        Detector::D0
    } else {
        Detector::D1
    }
}

/// Simulates one entanglement attempt: bin choice, excitation, decay
/// branch, collection, beamsplitter port, dark counts, window and veto.
///
/// Two photons in the same bin bunch into one port (Hong–Ou–Mandel); photons
/// in opposite bins pick ports independently.
pub fn simulate_attempt<R: Rng + ?Sized>(
    nodes: &[NodeSpec; 2],
    protocol: &ProtocolParams,
    noise: &NoiseParams,
    rng: &mut R,
) -> AttemptOutcome {
    let exp = [
        Exp::new(nodes[0].emitter.gamma()).expect("validated lifetime"),
        Exp::new(nodes[1].emitter.gamma()).expect("validated lifetime"),
    ];
    simulate_attempt_with(nodes, protocol, noise, &exp, rng)
}

fn simulate_attempt_with<R: Rng + ?Sized>(
    nodes: &[NodeSpec; 2],
    protocol: &ProtocolParams,
    noise: &NoiseParams,
    exp: &[Exp<f64>; 2],
    rng: &mut R,
) -> AttemptOutcome {
    let outs = [simulate_node(&nodes[0], &exp[0], rng), simulate_node(&nodes[1], &exp[1], rng)];
    let mut detections = Vec::with_capacity(2);
    let photons: Vec<&NodeOutcome> = outs.iter().filter(|o| o.detected).collect();
    match photons.as_slice() {
        [a, b] if a.bin == b.bin => {
            let port = random_detector(rng);
            for p in [a, b] {
                detections.push(photon_detection(p, port));
            }
        }
        ps => {
            for p in ps {
                detections.push(photon_detection(p, random_detector(rng)));
            }
        }
    }
    let p_dark = noise.dark_count_prob();
    if p_dark > 0.0 {
        for bin in [TimeBin::Early, TimeBin::Late] {
            for detector in [Detector::D0, Detector::D1] {
                if rng.random_bool(p_dark) {
                    detections.push(Detection {
                        bin,
                        detector,
                        offset_s: rng.random::<f64>() * noise.detection_gate_s,
                        source: DetectionSource::Dark,
                    });
                }
            }
        }
    }

    let leaked = outs.iter().any(|o| o.branch == DecayBranch::DLeak);
    let early: Vec<&Detection> = detections.iter().filter(|d| d.bin == TimeBin::Early).collect();
    let late: Vec<&Detection> = detections.iter().filter(|d| d.bin == TimeBin::Late).collect();
    let mut deviation_s = None;
    let mut origin = None;
    let herald = if leaked {
        HeraldResult::Rejected(RejectReason::MissingPhoton)
    } else {
        match (early.len(), late.len()) {
            (1, 1) => {
                let dev = late[0].offset_s - early[0].offset_s;
                deviation_s = Some(dev);
                let h = herald_from_deviation(early[0].detector, late[0].detector, dev, protocol.delta_t_s);
                if h.is_herald() {
                    let pi = outs.iter().any(|o| o.branch == DecayBranch::Pi);
                    let dark = early[0].source == DetectionSource::Dark || late[0].source == DetectionSource::Dark;
                    if pi {
                        origin = Some(HeraldOrigin::PiLeak);
                        if noise.veto_enabled && !rng.random_bool(noise.veto_miss_prob) {
                            HeraldResult::ErasureFlagged
                        } else {
                            h
                        }
                    } else {
                        origin = Some(if dark { HeraldOrigin::DarkCount } else { HeraldOrigin::Genuine });
                        h
                    }
                } else {
                    h
                }
            }
            (e, l) if e >= 2 || l >= 2 => HeraldResult::Rejected(RejectReason::SameBin),
            _ => HeraldResult::Rejected(RejectReason::MissingPhoton),
        }
    };
    AttemptOutcome {
        nodes: outs,
        detections,
        herald,
        deviation_s,
        origin,
    }
}

fn photon_detection(p: &NodeOutcome, detector: Detector) -> Detection {
    Detection {
        bin: p.bin.expect("detected photon has a bin"),
        detector,
        offset_s: p.arrival_offset_s,
        source: DetectionSource::Photon(p.node),
    }
}

/// Herald probability per attempt expected in the absence of dark counts:
/// ½·p̃_A·p̃_B·Y, where p̃ counts σ photons plus π photons leaking through
/// the polarizer.
pub fn expected_herald_probability(nodes: &[NodeSpec; 2], protocol: &ProtocolParams) -> f64 {
    let p = |n: &NodeSpec| {
        let e = &n.emitter;
        e.p_exc * (e.branch_sigma + e.branch_pi * (1.0 - e.pol_rejection)) * n.chain.efficiency()
    };
    let tau_r = nodes[0].emitter.tau_r_s;
    0.5 * p(&nodes[0]) * p(&nodes[1]) * window_stats(protocol.delta_t_s, tau_r).yield_y
}

/// Counts accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTally {
    pub attempts: u64,
    pub psi_plus: u64,
    pub psi_minus: u64,
    pub erasure_flagged: u64,
    pub rejected_same_bin: u64,
    pub rejected_missing_photon: u64,
    pub rejected_out_of_window: u64,
    /// Unflagged heralds with a π-branch node.
    pub false_pi: u64,
    /// Heralds completed by a dark count.
    pub false_dark: u64,
    /// Accepted coincidences (heralds plus flagged) used for deviation moments.
    pub deviation_n: u64,
    pub deviation_sum: f64,
    pub deviation_sum_sq: f64,
}

impl RunTally {
    pub fn record(&mut self, o: &AttemptOutcome) {
        self.attempts += 1;
        match o.herald {
            HeraldResult::PsiPlus => self.psi_plus += 1,
            HeraldResult::PsiMinus => self.psi_minus += 1,
            HeraldResult::ErasureFlagged => self.erasure_flagged += 1,
            HeraldResult::Rejected(RejectReason::SameBin) => self.rejected_same_bin += 1,
            HeraldResult::Rejected(RejectReason::MissingPhoton) => self.rejected_missing_photon += 1,
            HeraldResult::Rejected(RejectReason::OutOfWindow) => self.rejected_out_of_window += 1,
        }
        if o.herald.is_herald() {
            match o.origin {
                Some(HeraldOrigin::PiLeak) => self.false_pi += 1,
                Some(HeraldOrigin::DarkCount) => self.false_dark += 1,
                _ => {}
            }
        }
        if o.herald.is_herald() || o.herald == HeraldResult::ErasureFlagged {
            if let Some(d) = o.deviation_s {
                self.deviation_n += 1;
                self.deviation_sum += d;
                self.deviation_sum_sq += d * d;
            }
        }
    }

    /// Merges another tally; `other` is appended after `self`.
    pub fn merge(&mut self, other: &RunTally) {
        self.attempts += other.attempts;
        self.psi_plus += other.psi_plus;
        self.psi_minus += other.psi_minus;
        self.erasure_flagged += other.erasure_flagged;
        self.rejected_same_bin += other.rejected_same_bin;
        self.rejected_missing_photon += other.rejected_missing_photon;
        self.rejected_out_of_window += other.rejected_out_of_window;
        self.false_pi += other.false_pi;
        self.false_dark += other.false_dark;
        self.deviation_n += other.deviation_n;
        self.deviation_sum += other.deviation_sum;
        self.deviation_sum_sq += other.deviation_sum_sq;
    }

    /// Ψ⁺ plus Ψ⁻.
    pub fn heralds(&self) -> u64 {
        self.psi_plus + self.psi_minus
    }

    /// Accepted coincidences before the erasure check.
    pub fn coincidences(&self) -> u64 {
        self.heralds() + self.erasure_flagged
    }

    pub fn herald_probability(&self) -> f64 {
        ratio(self.coincidences(), self.attempts)
    }

    /// Fraction of accepted coincidences removed by the erasure check.
    pub fn erasure_flag_rate(&self) -> f64 {
        ratio(self.erasure_flagged, self.coincidences())
    }

    /// Fraction of reported heralds whose state is not the heralded Bell state.
    pub fn false_herald_rate(&self) -> f64 {
        ratio(self.false_pi + self.false_dark, self.heralds())
    }

    /// Mean square arrival deviation of accepted coincidences.
    pub fn deviation_mean_sq(&self) -> f64 {
        if self.deviation_n == 0 {
            0.0
        } else {
            self.deviation_sum_sq / self.deviation_n as f64
        }
    }

    pub fn summary(&self, protocol: &ProtocolParams) -> TallySummary {
        let p = self.herald_probability();
        TallySummary {
            attempts: self.attempts,
            heralds: self.heralds(),
            psi_plus: self.psi_plus,
            psi_minus: self.psi_minus,
            erasure_flagged: self.erasure_flagged,
            rejected_same_bin: self.rejected_same_bin,
            rejected_missing_photon: self.rejected_missing_photon,
            rejected_out_of_window: self.rejected_out_of_window,
            herald_probability: p,
            herald_probability_se: (p * (1.0 - p) / self.attempts.max(1) as f64).sqrt(),
            success_rate_hz: ratio(self.heralds(), self.attempts) * protocol.rep_rate_hz * protocol.duty,
            erasure_flag_rate: self.erasure_flag_rate(),
            false_herald_rate: self.false_herald_rate(),
            deviation_rms_s: self.deviation_mean_sq().sqrt(),
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Derived statistics of a run, as written to reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallySummary {
    pub attempts: u64,
    pub heralds: u64,
    pub psi_plus: u64,
    pub psi_minus: u64,
    pub erasure_flagged: u64,
    pub rejected_same_bin: u64,
    pub rejected_missing_photon: u64,
    pub rejected_out_of_window: u64,
    pub herald_probability: f64,
    pub herald_probability_se: f64,
    pub success_rate_hz: f64,
    pub erasure_flag_rate: f64,
    pub false_herald_rate: f64,
    pub deviation_rms_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub attempts: u64,
    /// Number of independent RNG streams; the result depends on this value
    /// but not on the size of the thread pool.
    pub workers: usize,
    pub seed: u64,
    /// Keep heralded outcomes and the arrival deviation of every accepted
    /// coincidence.
    pub collect_heralds: bool,
    /// Emit a time-tag log with this timing.
    pub events: Option<EventTiming>,
}

impl RunOptions {
    pub fn new(attempts: u64, seed: u64) -> Self {
        Self {
            attempts,
            workers: 1,
            seed,
            collect_heralds: false,
            events: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tally: RunTally,
    /// Deviations of accepted coincidences in attempt order.
    pub deviations: Vec<f64>,
    /// Heralded attempts as (attempt index, outcome), in attempt order.
    pub heralds: Vec<(u64, AttemptOutcome)>,
    pub events: Vec<TimeTagRecord>,
}

/// Independent generator for worker `stream` of a seeded run.
pub fn worker_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `opts.attempts` attempts split into contiguous blocks, one per
/// worker stream, and reduces results in worker order. Output is identical
/// for a given (seed, workers) regardless of scheduling.
pub fn run(nodes: &[NodeSpec; 2], protocol: &ProtocolParams, noise: &NoiseParams, opts: &RunOptions) -> RunOutput {
    let workers = opts.workers.max(1) as u64;
    let per = opts.attempts / workers;
    let extra = opts.attempts % workers;
    let exp = [
        Exp::new(nodes[0].emitter.gamma()).expect("validated lifetime"),
        Exp::new(nodes[1].emitter.gamma()).expect("validated lifetime"),
    ];
    let parts: Vec<RunOutput> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let start = w * per + w.min(extra);
            let count = per + u64::from(w < extra);
            let mut rng = worker_rng(opts.seed, w);
            let mut out = RunOutput::default();
            for k in start..start + count {
                let o = simulate_attempt_with(nodes, protocol, noise, &exp, &mut rng);
                out.tally.record(&o);
                let accepted = o.herald.is_herald() || o.herald == HeraldResult::ErasureFlagged;
                if opts.collect_heralds && accepted {
                    if let Some(d) = o.deviation_s {
                        out.deviations.push(d);
                    }
                }
                if let Some(timing) = &opts.events {
                    timing.append_attempt(k, &o, &mut out.events);
                }
                if opts.collect_heralds && o.herald.is_herald() {
                    out.heralds.push((k, o));
                }
            }
            out
        })
        .collect();
    let mut total = RunOutput::default();
    for p in parts {
        total.tally.merge(&p.tally);
        total.deviations.extend(p.deviations);
        total.heralds.extend(p.heralds);
        total.events.extend(p.events);
    }
    total
}
