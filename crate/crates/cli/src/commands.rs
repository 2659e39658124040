use anyhow::{anyhow, bail, Result};

use qfair::adversary::{AdversaryStrategy, RoundChoice};
use qfair::analysis::{
    count_trials, default_catalog, detection_prob_mp_at_round, detection_prob_mp_nonrational,
    detection_prob_mp_unscaled, detection_prob_rational_mp, detection_prob_xor, estimate_detection, fairness_audit,
    mp_audit_grid, nash_check, trial_seed, xor_audit_cases, AuditCase, Scenario, Verdict, XorInputChoice,
};
use qfair::protocol::{run_trial, Party};

use crate::config::ExperimentConfig;
use crate::report::{Report, Row};

/// TV distance below which an audit case passes.
pub const TV_THRESHOLD: f64 = 0.02;

pub fn describe(s: &Scenario) -> String {
    match s {
        Scenario::Qmp { inputs } => format!("i={} j={} m={}", inputs.i, inputs.j, inputs.m),
        Scenario::Qrmp { i, j, gamma } => format!("i={i} j={j} gamma={gamma}"),
        Scenario::Qep { inputs: XorInputChoice::Fixed(x), gamma, .. } => format!("x={} y={} gamma={gamma}", x.x, x.y),
        Scenario::Qep { inputs: XorInputChoice::Uniform, gamma, .. } => format!("inputs=uniform gamma={gamma}"),
    }
}

pub struct RunOutput {
    pub report: Report,
    pub transcripts: String,
    pub recorded: usize,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let strategies = cfg.strategies.pair();
    let mut rows = Vec::new();
    let mut transcripts = String::from("run_id,round,sub_round,actor,action,outcome\n");
    let mut recorded = 0usize;
    let mut run_id = 0u64;
    for scenario in cfg.scenarios()? {
        let counts = count_trials(cfg.trials, cfg.seed, |s| {
            run_trial::<f64>(&scenario.setup(s), &strategies, s).map(|t| t.outcome())
        })?;
        for (outcome, count) in &counts {
            let mut row = Row::new(
                format!("{} p1={} p2={} outcome={outcome}", describe(&scenario), strategies[0], strategies[1]),
                *count as f64 / cfg.trials as f64,
            );
            row.note = format!("count={count}");
            rows.push(row);
        }
        for t in 0..cfg.trials {
            if recorded >= cfg.outputs.max_transcripts {
                break;
            }
            let s = trial_seed(cfg.seed, t);
            let trial = run_trial::<f64>(&scenario.setup(s), &strategies, s)?;
            trial.execution.transcript.write_lines(run_id, &mut transcripts);
            recorded += 1;
            run_id += 1;
        }
    }
    let mut row = Row::new("transcripts_recorded", recorded as f64);
    row.note = format!("cap={}", cfg.outputs.max_transcripts);
    rows.push(row);
    Ok(RunOutput { report: Report::new("run", cfg, rows), transcripts, recorded })
}

fn detection_closed_form(scenario: &Scenario, attacker: Party, strategy: &AdversaryStrategy) -> Option<f64> {
    let AdversaryStrategy::ForgeArbitraryQubit { round, .. } = strategy else {
        return None;
    };
    match scenario {
        Scenario::Qmp { inputs } => {
            let reveal = match attacker {
                Party::P1 => inputs.j,
                Party::P2 => inputs.i,
            };
            match round {
                RoundChoice::UniformRandom => detection_prob_mp_nonrational(reveal, inputs.m).ok(),
                RoundChoice::Fixed(l) => Some(detection_prob_mp_at_round(*l, reveal)),
            }
        }
        Scenario::Qrmp { .. } => Some(detection_prob_rational_mp()),
        Scenario::Qep { .. } => Some(detection_prob_xor()),
    }
}

pub fn detect(cfg: &ExperimentConfig) -> Result<Report> {
    let (attacker, strategy) = cfg
        .deviant()
        .filter(|(_, s)| s.is_forging())
        .ok_or_else(|| anyhow!("config field `strategies`: detect needs a forging strategy for one party"))?;
    let mut rows = Vec::new();
    for scenario in cfg.scenarios()? {
        let p = estimate_detection(&scenario, attacker, &strategy, cfg.trials, cfg.seed)?;
        let mut row = Row::new(format!("{} attacker={attacker} strategy={strategy}", describe(&scenario)), p.estimate);
        row.stderr = Some(p.stderr);
        row.note = format!("eligible={}", p.total);
        if let Some(cf) = detection_closed_form(&scenario, attacker, &strategy) {
            let z = if p.stderr > 0.0 { (p.estimate - cf) / p.stderr } else if p.estimate == cf { 0.0 } else { f64::INFINITY };
            row.closed_form = Some(cf);
            row.z = Some(z);
            row.pass = Some(p.total > 0 && z.abs() <= 3.0);
            if let (Scenario::Qmp { inputs }, Party::P2, RoundChoice::UniformRandom) =
                (&scenario, attacker, strategy_round(&strategy))
            {
                let unscaled: f64 = detection_prob_mp_unscaled(inputs.i, inputs.m)?;
                let z_alt = if p.stderr > 0.0 { (p.estimate - unscaled) / p.stderr } else { f64::INFINITY };
                row.note.push_str(&format!(
                    "; flag: unscaled (3i-1)/m = {unscaled} differs by {:.1} stderr",
                    z_alt.abs()
                ));
            }
        } else {
            row.note.push_str("; no closed form for this strategy");
        }
        rows.push(row);
    }
    Ok(Report::new("detect", cfg, rows))
}

fn strategy_round(s: &AdversaryStrategy) -> RoundChoice {
    match s {
        AdversaryStrategy::ForgeArbitraryQubit { round, .. }
        | AdversaryStrategy::SwapShares { round }
        | AdversaryStrategy::AbortAt { round } => *round,
        _ => RoundChoice::UniformRandom,
    }
}

fn audit_cases(scenario: &Scenario) -> Result<Vec<AuditCase>> {
    Ok(match scenario {
        Scenario::Qmp { inputs } => mp_audit_grid(inputs.m),
        Scenario::Qep { inputs, variant: qfair::protocol::QepVariant::Qep, gamma } => xor_audit_cases(*gamma)
            .into_iter()
            .map(|c| match c {
                AuditCase::Xor { gamma, abort, .. } => AuditCase::Xor { inputs: *inputs, gamma, abort },
                other => other,
            })
            .collect(),
        _ => bail!("config field `protocol`: fairness audits cover QMP and QEP"),
    })
}

pub fn fairness(cfg: &ExperimentConfig) -> Result<Report> {
    let mut cases: Vec<AuditCase> = Vec::new();
    for scenario in cfg.scenarios()? {
        for case in audit_cases(&scenario)? {
            if !cases.contains(&case) {
                cases.push(case);
            }
        }
    }
    let mut rows = Vec::new();
    for case in cases {
        let r = fairness_audit(&case, cfg.trials, cfg.seed)?;
        let mut row = Row::new(case.label(), r.tv);
        row.closed_form = Some(0.0);
        row.pass = Some(r.tv < TV_THRESHOLD);
        row.note = format!("tv threshold {TV_THRESHOLD}");
        rows.push(row);
    }
    Ok(Report::new("fairness", cfg, rows))
}

pub fn nash(cfg: &ExperimentConfig) -> Result<Report> {
    if !cfg.protocol.is_rational() {
        bail!("config field `protocol`: nash needs a rational protocol (QRMP, QEP or QEP2)");
    }
    let utilities = cfg
        .utilities
        .ok_or_else(|| anyhow!("config field `utilities`: required for nash"))?
        .pair();
    let catalog = cfg.nash.catalog.clone().unwrap_or_else(default_catalog);
    let mut rows = Vec::new();
    for scenario in cfg.scenarios()? {
        let point = describe(&scenario);
        let report = nash_check(&scenario, utilities, &catalog, cfg.trials, cfg.seed)?;
        for r in &report.rows {
            let mut row = Row::new(format!("{point} deviant={} strategy={}", r.deviant, r.strategy), r.utility.mean);
            row.stderr = Some(r.utility.stderr);
            row.closed_form = Some(r.honest_utility.mean);
            let spread = r.utility.stderr.hypot(r.honest_utility.stderr);
            row.z = (spread > 0.0).then(|| (r.honest_utility.mean - r.utility.mean) / spread);
            row.pass = Some(r.verdict == Verdict::StrictlyDominated);
            row.note = format!("{}; closed_form column is the honest utility", r.verdict);
            rows.push(row);
        }
        let gamma = scenario.gamma().expect("rational");
        for c in &report.conditions {
            let mut row = Row::new(format!("{point} party={} condition={}", c.party, c.name), gamma);
            row.closed_form = c.bound;
            if c.informational {
                row.note = format!("informational; holds={}", c.holds);
            } else {
                row.pass = Some(c.holds);
                row.note = match c.bound {
                    Some(b) => format!("estimate column is gamma; bound {b}"),
                    None => "precondition".to_string(),
                };
            }
            rows.push(row);
        }
    }
    Ok(Report::new("nash", cfg, rows))
}
