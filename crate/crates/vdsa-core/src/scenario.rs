//! Time-varying CBR traces and the desk-scale platoon evaluation.
//!
//! The trace generator composes, per channel and timestep, a
//! piecewise-constant baseline, duty contributions from interfering
//! vehicles that enter and leave the platoon's sensing range (Poisson
//! arrivals per lane, dwell time from relative speed), and step
//! contributions from roadside units while the platoon drives through
//! their range. Everything clamps into [0, 1] and is deterministic under
//! a seed.
//!
//! [`run_platoon`] drives a [`DecisionEngine`](crate::bumblebee::DecisionEngine)
//! along a trace and scores leader-packet reception per follower with the
//! proxy `Bernoulli((1 - beta_selected) * attenuation(position))`. The
//! proxy keeps the causal chain "lower CBR, higher reception" without
//! modeling a MAC/PHY; the position attenuation (1.0 through follower 3,
//! linear to 0.9 at follower 9) is calibrated for qualitative ordering
//! only.

use std::io::Write;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bumblebee::{DecisionConfig, DecisionEngine};
use crate::{Error, Result};

/// A labeled instant on a trace (event markers for reports).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TraceEvent {
    pub time: f64,
    pub label: String,
}

/// Per-timestep, per-channel CBR values on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrace {
    timestep: f64,
    betas: Vec<Vec<f64>>,
    events: Vec<TraceEvent>,
}

impl ScenarioTrace {
    pub fn new(timestep: f64, betas: Vec<Vec<f64>>, events: Vec<TraceEvent>) -> Result<Self> {
        if timestep <= 0.0 || betas.is_empty() {
            return Err(Error::ConfigMismatch(
                "trace needs a positive timestep and at least one row".into(),
            ));
        }
        let channels = betas[0].len();
        if channels == 0 {
            return Err(Error::ConfigMismatch("trace needs at least one channel".into()));
        }
        for (i, row) in betas.iter().enumerate() {
            if row.len() != channels {
                return Err(Error::ConfigMismatch(format!(
                    "row {i} has {} channels, expected {channels}",
                    row.len()
                )));
            }
            for (l, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidCbr { channel: l, value });
                }
            }
        }
        Ok(ScenarioTrace {
            timestep,
            betas,
            events,
        })
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn channels(&self) -> usize {
        self.betas[0].len()
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.betas[step]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.betas
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.timestep
    }

    /// Indices of the channels with the lowest true CBR at `step`.
    pub fn best_channels(&self, step: usize) -> Vec<usize> {
        let row = &self.betas[step];
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        (0..row.len()).filter(|&l| row[l] == min).collect()
    }
}

/// A timed change of one channel's baseline CBR.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BaselineStep {
    pub time_s: f64,
    /// 1-based channel index, matching the `beta_<n>` trace columns.
    pub channel: usize,
    pub value: f64,
}

/// Road, traffic and platoon parameters driving the trace generator and
/// the platoon evaluation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrafficScenario {
    pub road_length_km: f64,
    /// Lanes carrying interfering (non-platoon) traffic.
    pub lanes: usize,
    pub vehicle_density_per_km_lane: f64,
    /// Probability that an interfering vehicle transmits on each channel;
    /// must sum to 1.
    pub channel_choice_probs: Vec<f64>,
    pub rsu_positions_km: Vec<f64>,
    /// 1-based channel index per RSU.
    pub rsu_channels: Vec<usize>,
    pub rsu_message_period_ms: f64,
    pub platoon_size: usize,
    pub platoon_speed_kph: f64,
    pub message_period_ms: f64,
    pub sensing_slot_us: f64,
    /// Mean speed of interfering vehicles; alternate lanes run opposite
    /// to the platoon.
    pub mean_vehicle_speed_kph: f64,
    /// CBR added by one interfering vehicle inside the sensing range.
    pub vehicle_duty: f64,
    /// CBR added by an RSU while the platoon is inside its range.
    pub rsu_duty: f64,
    pub interference_range_km: f64,
    pub rsu_range_km: f64,
    /// Initial per-channel baseline CBR.
    pub channel_baselines: Vec<f64>,
    /// Timed baseline changes (applied in time order).
    pub baseline_steps: Vec<BaselineStep>,
    /// Trace resolution; also the decision period of the platoon.
    pub timestep_s: f64,
}

impl Default for TrafficScenario {
    fn default() -> Self {
        TrafficScenario {
            road_length_km: 5.0,
            lanes: 6,
            vehicle_density_per_km_lane: 10.0,
            channel_choice_probs: vec![0.08, 0.28, 0.16, 0.48],
            rsu_positions_km: vec![1.0, 2.0, 3.0, 4.0],
            rsu_channels: vec![1, 2, 3, 1],
            rsu_message_period_ms: 2.0,
            platoon_size: 10,
            platoon_speed_kph: 130.0,
            message_period_ms: 100.0,
            sensing_slot_us: 32.0,
            mean_vehicle_speed_kph: 110.0,
            vehicle_duty: 0.003,
            rsu_duty: 0.15,
            interference_range_km: 0.2,
            rsu_range_km: 0.3,
            channel_baselines: vec![0.3, 0.05, 0.6, 0.9],
            baseline_steps: Vec::new(),
            timestep_s: 0.1,
        }
    }
}

impl TrafficScenario {
    pub fn channels(&self) -> usize {
        self.channel_baselines.len()
    }

    pub fn validate(&self) -> Result<()> {
        let channels = self.channels();
        if channels < 2 {
            return Err(Error::TooFewChannels {
                min: 2,
                got: channels,
            });
        }
        if self.channel_choice_probs.len() != channels {
            return Err(Error::ConfigMismatch(format!(
                "{} channel choice probabilities for {channels} channels",
                self.channel_choice_probs.len()
            )));
        }
        let prob_sum: f64 = self.channel_choice_probs.iter().sum();
        if (prob_sum - 1.0).abs() > 1e-9 || self.channel_choice_probs.iter().any(|&p| p < 0.0) {
            return Err(Error::ConfigMismatch(format!(
                "channel choice probabilities must be non-negative and sum to 1, got {prob_sum}"
            )));
        }
        if self.platoon_size < 2 {
            return Err(Error::ConfigMismatch(
                "platoon needs a leader and at least one follower".into(),
            ));
        }
        if self.rsu_positions_km.len() != self.rsu_channels.len() {
            return Err(Error::ConfigMismatch(format!(
                "{} RSU positions but {} RSU channels",
                self.rsu_positions_km.len(),
                self.rsu_channels.len()
            )));
        }
        for &ch in &self.rsu_channels {
            if ch == 0 || ch > channels {
                return Err(Error::ConfigMismatch(format!(
                    "RSU channel {ch} outside 1..={channels}"
                )));
            }
        }
        for (l, &b) in self.channel_baselines.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidCbr {
                    channel: l,
                    value: b,
                });
            }
        }
        for step in &self.baseline_steps {
            if step.channel == 0 || step.channel > channels {
                return Err(Error::ConfigMismatch(format!(
                    "baseline step channel {} outside 1..={channels}",
                    step.channel
                )));
            }
            if !(0.0..=1.0).contains(&step.value) {
                return Err(Error::InvalidCbr {
                    channel: step.channel - 1,
                    value: step.value,
                });
            }
        }
        if self.timestep_s <= 0.0 || self.platoon_speed_kph <= 0.0 {
            return Err(Error::ConfigMismatch(
                "timestep and platoon speed must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// An interfering vehicle currently inside the sensing range.
struct ActiveVehicle {
    channel: usize,
    expires_at: f64,
}

/// Generate a time-varying CBR trace for `duration_s` seconds.
pub fn synth_trace(scenario: &TrafficScenario, duration_s: f64, seed: u64) -> Result<ScenarioTrace> {
    scenario.validate()?;
    if duration_s <= 0.0 {
        return Err(Error::ConfigMismatch("duration must be positive".into()));
    }
    let dt = scenario.timestep_s;
    let steps = (duration_s / dt).round() as usize;
    let mut rng = StdRng::seed_from_u64(seed);

    // per-lane kinematics: even lanes co-directional, odd lanes opposing
    let platoon_speed = scenario.platoon_speed_kph / 3600.0; // km/s
    let other_speed = scenario.mean_vehicle_speed_kph / 3600.0;
    let lane_relative_speed: Vec<f64> = (0..scenario.lanes)
        .map(|lane| {
            if lane % 2 == 0 {
                (platoon_speed - other_speed).abs().max(1e-6)
            } else {
                platoon_speed + other_speed
            }
        })
        .collect();
    let dwell: Vec<f64> = lane_relative_speed
        .iter()
        .map(|v| 2.0 * scenario.interference_range_km / v)
        .collect();
    let arrival_rate: Vec<f64> = lane_relative_speed
        .iter()
        .map(|v| scenario.vehicle_density_per_km_lane * v)
        .collect();

    let mut baselines = scenario.channel_baselines.clone();
    let mut pending_steps: Vec<&BaselineStep> = scenario.baseline_steps.iter().collect();
    pending_steps.sort_by(|a, b| a.time_s.partial_cmp(&b.time_s).unwrap());
    let mut next_step = 0usize;

    let mut active: Vec<ActiveVehicle> = Vec::new();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut rsu_inside = vec![false; scenario.rsu_positions_km.len()];
    let mut rows = Vec::with_capacity(steps);

    for step in 0..steps {
        let t = step as f64 * dt;
        while next_step < pending_steps.len() && pending_steps[next_step].time_s <= t {
            let change = pending_steps[next_step];
            baselines[change.channel - 1] = change.value;
            events.push(TraceEvent {
                time: t,
                label: format!("baseline channel {} -> {}", change.channel, change.value),
            });
            next_step += 1;
        }

        active.retain(|v| v.expires_at > t);
        for lane in 0..scenario.lanes {
            let mean_arrivals = arrival_rate[lane] * dt;
            for _ in 0..poisson_draw(mean_arrivals, &mut rng) {
                let channel = pick_channel(&scenario.channel_choice_probs, &mut rng);
                active.push(ActiveVehicle {
                    channel,
                    expires_at: t + dwell[lane],
                });
            }
        }

        let mut row = baselines.clone();
        for vehicle in &active {
            row[vehicle.channel] += scenario.vehicle_duty;
        }

        let platoon_position = platoon_speed * t * 3600.0 / 3600.0; // km
        for (r, (&position, &channel)) in scenario
            .rsu_positions_km
            .iter()
            .zip(&scenario.rsu_channels)
            .enumerate()
        {
            let inside = (platoon_position - position).abs() <= scenario.rsu_range_km;
            if inside {
                row[channel - 1] += scenario.rsu_duty;
            }
            if inside != rsu_inside[r] {
                events.push(TraceEvent {
                    time: t,
                    label: format!(
                        "RSU {r} (channel {channel}) {}",
                        if inside { "enter" } else { "exit" }
                    ),
                });
                rsu_inside[r] = inside;
            }
        }

        for value in &mut row {
            *value = value.clamp(0.0, 1.0);
        }
        rows.push(row);
    }
    ScenarioTrace::new(dt, rows, events)
}

fn poisson_draw(mean: f64, rng: &mut impl Rng) -> u32 {
    // Knuth's method; arrival means per timestep are well below 1
    let limit = (-mean).exp();
    let mut count = 0u32;
    let mut product: f64 = 1.0;
    loop {
        product *= rng.random::<f64>();
        if product <= limit {
            return count;
        }
        count += 1;
    }
}

fn pick_channel(probs: &[f64], rng: &mut impl Rng) -> usize {
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    for (l, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return l;
        }
    }
    probs.len() - 1
}

/// Write a trace as CSV: header `t,beta_1,...,beta_L`, shortest
/// round-trip float formatting.
pub fn save_trace(trace: &ScenarioTrace, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push('t');
    for l in 1..=trace.channels() {
        out.push_str(&format!(",beta_{l}"));
    }
    out.push('\n');
    for step in 0..trace.len() {
        out.push_str(&format!("{}", trace.time_at(step)));
        for &value in trace.row(step) {
            out.push_str(&format!(",{value}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Parse a trace CSV, validating the header, monotone uniform timestamps
/// and the [0, 1] range; errors carry the 1-based line number.
pub fn load_trace(path: &Path) -> Result<ScenarioTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_error = |line: usize, message: String| Error::TraceParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(parse_error(1, "empty file".into()));
    };
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"t") || columns.len() < 2 {
        return Err(parse_error(1, format!("bad header {header:?}")));
    }
    for (l, column) in columns[1..].iter().enumerate() {
        let expected = format!("beta_{}", l + 1);
        if *column != expected {
            return Err(parse_error(1, format!("column {column:?}, expected {expected:?}")));
        }
    }
    let channels = columns.len() - 1;

    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (index, line) in lines {
        let line_number = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != channels + 1 {
            return Err(parse_error(
                line_number,
                format!("{} fields, expected {}", fields.len(), channels + 1),
            ));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_error(line_number, format!("bad timestamp {:?}", fields[0])))?;
        if let Some(&previous) = times.last() {
            if t <= previous {
                return Err(parse_error(
                    line_number,
                    format!("time {t} not after {previous}"),
                ));
            }
        }
        let mut row = Vec::with_capacity(channels);
        for field in &fields[1..] {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_error(line_number, format!("bad value {field:?}")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(parse_error(
                    line_number,
                    format!("value {value} outside [0, 1]"),
                ));
            }
            row.push(value);
        }
        times.push(t);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(1, "no data rows".into()));
    }
    let timestep = if times.len() >= 2 {
        let dt = times[1] - times[0];
        for (i, pair) in times.windows(2).enumerate() {
            if ((pair[1] - pair[0]) - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(parse_error(
                    i + 3,
                    format!("non-uniform timestep {} vs {dt}", pair[1] - pair[0]),
                ));
            }
        }
        dt
    } else {
        1.0
    };
    ScenarioTrace::new(timestep, rows, Vec::new())
}

/// Reception proxy attenuation by platoon position (follower 1 is right
/// behind the leader): 1.0 through position 3, then linear to 0.9 at
/// position 9.
pub fn position_attenuation(position: usize) -> f64 {
    if position <= 3 {
        1.0
    } else {
        (1.0 - 0.1 * (position as f64 - 3.0) / 6.0).max(0.0)
    }
}

/// Everything one platoon run produced.
#[derive(Debug, Clone)]
pub struct ReceptionReport {
    timestep: f64,
    /// Channel selected by the engine per timestep (starting at step 0).
    pub selected: Vec<usize>,
    /// Lowest-index true-best channel per timestep.
    pub reference: Vec<usize>,
    /// Whether the selected channel was in the true argmin set.
    pub matched_best: Vec<bool>,
    /// Per follower, per timestep leader-packet reception indicator.
    pub successes: Vec<Vec<bool>>,
    /// Rolling success ratio per follower over `rolling_window` steps.
    pub rolling_ratio: Vec<Vec<f64>>,
    pub rolling_window: usize,
    /// True CBR of the selected channel per timestep.
    pub selected_beta: Vec<f64>,
    /// True CBR of the reference best channel per timestep.
    pub reference_beta: Vec<f64>,
    pub switch_times: Vec<f64>,
}

impl ReceptionReport {
    pub fn steps(&self) -> usize {
        self.selected.len()
    }

    pub fn followers(&self) -> usize {
        self.successes.len()
    }

    /// Fraction of timesteps where the selection was a true best channel.
    pub fn best_match_fraction(&self) -> f64 {
        let hits = self.matched_best.iter().filter(|&&m| m).count();
        hits as f64 / self.matched_best.len() as f64
    }

    pub fn mean_success(&self, follower: usize) -> f64 {
        let row = &self.successes[follower];
        row.iter().filter(|&&s| s).count() as f64 / row.len() as f64
    }

    /// Mean of `1 - beta` over the selected channels.
    pub fn mean_selected_availability(&self) -> f64 {
        1.0 - self.selected_beta.iter().sum::<f64>() / self.selected_beta.len() as f64
    }

    /// Mean of `1 - beta` over the reference best channels.
    pub fn mean_reference_availability(&self) -> f64 {
        1.0 - self.reference_beta.iter().sum::<f64>() / self.reference_beta.len() as f64
    }

    pub fn switches_before(&self, time_s: f64) -> usize {
        self.switch_times.iter().filter(|&&t| t < time_s).count()
    }

    /// Write `t,selected,reference,success_ratio_v1,...` CSV with 1-based
    /// channel indices.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t,selected,reference");
        for v in 1..=self.followers() {
            out.push_str(&format!(",success_ratio_v{v}"));
        }
        out.push('\n');
        for step in 0..self.steps() {
            out.push_str(&format!(
                "{},{},{}",
                step as f64 * self.timestep,
                self.selected[step] + 1,
                self.reference[step] + 1
            ));
            for follower in 0..self.followers() {
                out.push_str(&format!(",{}", self.rolling_ratio[follower][step]));
            }
            out.push('\n');
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Seconds of history in the rolling reception ratio.
pub const ROLLING_WINDOW_S: f64 = 10.0;

/// Run one platoon along a trace.
///
/// One decision iteration per trace timestep; the sensing budget is one
/// slot per platoon vehicle. Reception of the leader's packet by the
/// follower at position `p` succeeds with probability
/// `(1 - beta_selected(t)) * position_attenuation(p)`.
pub fn run_platoon(
    trace: &ScenarioTrace,
    engine_config: &DecisionConfig,
    platoon: &TrafficScenario,
    seed: u64,
) -> Result<ReceptionReport> {
    platoon.validate()?;
    if trace.channels() != platoon.channels() {
        return Err(Error::ConfigMismatch(format!(
            "trace has {} channels, scenario has {}",
            trace.channels(),
            platoon.channels()
        )));
    }
    if engine_config.budget != platoon.platoon_size as u64 {
        return Err(Error::ConfigMismatch(format!(
            "sensing budget {} but one slot per vehicle means {}",
            engine_config.budget, platoon.platoon_size
        )));
    }
    let followers = platoon.platoon_size - 1;
    let steps = trace.len();
    let rolling_window = (ROLLING_WINDOW_S / trace.timestep()).round().max(1.0) as usize;

    let mut engine = DecisionEngine::new(*engine_config, trace.channels(), seed)?;
    let mut reception_rng = StdRng::seed_from_u64(crate::seed::derive_seed(seed, &[0x5EC]));

    let mut report = ReceptionReport {
        timestep: trace.timestep(),
        selected: Vec::with_capacity(steps),
        reference: Vec::with_capacity(steps),
        matched_best: Vec::with_capacity(steps),
        successes: vec![Vec::with_capacity(steps); followers],
        rolling_ratio: vec![Vec::with_capacity(steps); followers],
        rolling_window,
        selected_beta: Vec::with_capacity(steps),
        reference_beta: Vec::with_capacity(steps),
        switch_times: Vec::new(),
    };

    let mut rolling_hits: Vec<u32> = vec![0; followers];
    for step in 0..steps {
        let row = trace.row(step);
        let selected = if step == 0 {
            engine.initialize(row)?
        } else {
            let outcome = engine.step(row)?;
            if outcome.switched {
                report.switch_times.push(trace.time_at(step));
            }
            outcome.selected
        };
        let best = trace.best_channels(step);
        report.selected.push(selected);
        report.reference.push(best[0]);
        report.matched_best.push(best.contains(&selected));
        report.selected_beta.push(row[selected]);
        report.reference_beta.push(row[best[0]]);

        for follower in 0..followers {
            let position = follower + 1;
            let p_success = (1.0 - row[selected]) * position_attenuation(position);
            let success = reception_rng.random_bool(p_success.clamp(0.0, 1.0));
            let history = &mut report.successes[follower];
            history.push(success);
            rolling_hits[follower] += u32::from(success);
            if history.len() > rolling_window {
                let leaving = history[history.len() - 1 - rolling_window];
                rolling_hits[follower] -= u32::from(leaving);
            }
            let window_len = history.len().min(rolling_window);
            report.rolling_ratio[follower]
                .push(f64::from(rolling_hits[follower]) / window_len as f64);
        }
    }
    Ok(report)
}
