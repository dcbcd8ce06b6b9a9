//! Flat CSV tables: one row per color, member, claim or `n`.

use std::io::Write;

use super::{ClaimsAudit, EquilibriumReport, FairnessReport, ScalingTable};

pub fn fairness_csv<W: Write>(report: &FairnessReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["color", "active_share", "wins", "frequency", "z_score", "trials", "successes", "fail_count"])?;
    for c in &report.colors {
        w.write_record([
            c.color.0.to_string(),
            c.active_share.to_string(),
            c.wins.to_string(),
            c.frequency.to_string(),
            c.z_score.to_string(),
            report.trials.to_string(),
            report.successes.to_string(),
            report.fail_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn equilibrium_csv<W: Write>(report: &EquilibriumReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "member",
        "color",
        "baseline_mean",
        "deviation_mean",
        "difference",
        "ci_half_width",
        "baseline_mean_unconditioned",
        "deviation_mean_unconditioned",
        "no_gain",
        "kept_pairs",
        "dropped_pairs",
    ])?;
    for m in &report.member_stats {
        w.write_record([
            m.member.0.to_string(),
            m.color.0.to_string(),
            m.baseline_mean.to_string(),
            m.deviation_mean.to_string(),
            m.difference.to_string(),
            m.ci_half_width.to_string(),
            m.baseline_mean_unconditioned.to_string(),
            m.deviation_mean_unconditioned.to_string(),
            m.no_gain.to_string(),
            report.kept_pairs.to_string(),
            report.dropped_pairs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn claims_csv<W: Write>(audit: &ClaimsAudit, sigma_mult: f64, out: W) -> csv::Result<()> {
    let v = audit.verdict(sigma_mult);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["claim", "samples", "observed", "expected", "tolerance", "verdict"])?;
    w.write_record([
        "1".to_string(),
        audit.claim1_checked.to_string(),
        audit.claim1_violations.to_string(),
        "0".to_string(),
        "0".to_string(),
        format!("{:?}", v.claim1).to_lowercase(),
    ])?;
    for c in &v.claim3_colors {
        w.write_record([
            format!("3:color{}", c.color.0),
            audit.claim3_samples.to_string(),
            c.observed.to_string(),
            c.expected.to_string(),
            c.tolerance.to_string(),
            (if c.pass { "pass" } else { "fail" }).to_string(),
        ])?;
    }
    w.write_record([
        "4".to_string(),
        audit.claim4_samples.to_string(),
        v.claim4_rate.to_string(),
        v.claim4_bound.to_string(),
        v.claim4_slack.to_string(),
        format!("{:?}", v.claim4).to_lowercase(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn scaling_csv<W: Write>(table: &ScalingTable, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "q",
        "rounds_elapsed",
        "max_message_bits",
        "max_tally",
        "good_rate",
        "fail_rate",
        "reference",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.n.to_string(),
            r.q.to_string(),
            r.rounds_elapsed.to_string(),
            r.max_message_bits.to_string(),
            r.max_tally.to_string(),
            r.good_rate.to_string(),
            r.fail_rate.to_string(),
            r.reference.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
