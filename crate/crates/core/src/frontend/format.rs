use std::fmt::Write;

use crate::engine::{GroundModel, Refutation, TraceEvent, Verdict};
use crate::lra::Witness;
use crate::verify::{GroundVerdict, Saturation, SaturationReport};

pub fn format_witness(w: &Witness) -> String {
    let parts: Vec<String> = w.iter().map(|(t, v)| format!("{t} -> {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn learned_list(out: &mut String, learned: &[crate::clauses::Clause]) {
    let _ = writeln!(out, "learned: {}", learned.len());
    for c in learned {
        let _ = writeln!(out, "  {c}");
    }
}

fn refutation(out: &mut String, r: &Refutation) {
    let _ = writeln!(out, "conflict: {}", r.conflict);
    let _ = writeln!(out, "witness: {}", format_witness(&r.witness));
    learned_list(out, &r.learned);
}

pub fn format_model(m: &GroundModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trail: {}", m.trail);
    let _ = writeln!(out, "witness: {}", format_witness(&m.witness));
    let status = match m.verified {
        Some(true) => "verified",
        Some(false) => "refuted",
        None => "unchecked",
    };
    let _ = writeln!(out, "CANDIDATE model ({status}):");
    out.push_str(&m.candidate.to_string());
    learned_list(&mut out, &m.learned);
    out
}

pub fn format_verdict(v: &Verdict) -> String {
    let mut out = format!("STATUS: {}\n", v.name());
    match v {
        Verdict::Unsatisfiable(r) => refutation(&mut out, r),
        Verdict::SatisfiableGround(m) => out.push_str(&format_model(m)),
        Verdict::Unknown(reason) => {
            let _ = writeln!(out, "reason: {reason}");
        }
    }
    out
}

pub fn format_trace(trace: &[TraceEvent]) -> String {
    trace.iter().map(|e| format!("{e}\n")).collect()
}

pub fn format_saturation(r: &SaturationReport) -> String {
    let mut out = String::new();
    match &r.verdict {
        Saturation::Saturated => out.push_str("STATUS: Saturated\n"),
        Saturation::Unknown => out.push_str("STATUS: Unknown\n"),
        Saturation::NotSaturated(w) => {
            out.push_str("STATUS: NotSaturated\n");
            for s in &w.steps {
                let _ = writeln!(out, "  {s}");
            }
            let _ = writeln!(out, "  Conflict clause#{} {}", w.clause, w.subst);
        }
    }
    let _ = writeln!(out, "explored: {}", r.explored);
    out
}

pub fn format_ground(v: &GroundVerdict) -> String {
    match v {
        GroundVerdict::Unsatisfiable { witness } => format!("STATUS: Unsatisfiable\nwitness: {}\n", format_witness(witness)),
        GroundVerdict::SatisfiableOverB => "STATUS: SatisfiableOverB\n".into(),
    }
}
