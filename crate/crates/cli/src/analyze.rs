use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use handkin::actuation::fit_linear;
use handkin::hand::{
    fingertip_trajectory, flexion_plane, log_spiral_fit, rom_coverage, AbsentPolicy, Aggregation,
};
use handkin::numfmt::sig6;
use handkin::{Digit, Envelope, JointId};
use serde_json::json;

use crate::data::Loaded;
use crate::Format;

pub fn coverage(data: &Loaded, absent: AbsentPolicy, format: Format) -> Result<String> {
    let mut results = Vec::new();
    for reference in [Envelope::Human, Envelope::Grasping] {
        for agg in [Aggregation::PerJointMean, Aggregation::LengthWeighted] {
            results.push(rom_coverage(
                &data.spec,
                Envelope::Ours,
                reference,
                agg,
                absent,
            )?);
        }
    }
    Ok(match format {
        Format::Json => pretty(&json!({ "absent": absent, "results": results })),
        Format::Csv => {
            let mut out = String::from(
                "target,reference,aggregation,joint,overlap_deg,reference_deg,ratio\n",
            );
            for c in &results {
                for j in &c.joints {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        c.target,
                        c.reference,
                        c.aggregation,
                        j.joint,
                        sig6(j.overlap),
                        sig6(j.reference_length),
                        sig6(j.ratio)
                    );
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for c in &results {
                let marker = if c.aggregation == Aggregation::PerJointMean {
                    " (default)"
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    "ours vs {:<8} {:<16} {:.4} ({:.2}%){marker}",
                    c.reference.to_string(),
                    c.aggregation.to_string(),
                    c.value,
                    c.value * 100.0
                );
            }
            let _ = writeln!(out, "absent joints: {absent}");
            out
        }
    })
}

pub fn trajectory(
    data: &Loaded,
    digit: Digit,
    samples: usize,
    format: Format,
) -> Result<(String, String)> {
    let tips = fingertip_trajectory(&data.spec, digit, &data.coupling, samples)?;
    let fit = log_spiral_fit(&flexion_plane(&tips))?;
    let summary = format!(
        "{digit}: log-spiral r = a·exp(b·θ), a = {} mm, b = {}, R² = {:.4}\n",
        sig6(fit.a),
        sig6(fit.b),
        fit.r_squared
    );
    let body = match format {
        Format::Json => pretty(&json!({
            "digit": digit,
            "samples": samples,
            "points": tips.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
            "spiral_fit": fit,
        })),
        Format::Csv | Format::Text => {
            let mut out = String::from("sample,x_mm,y_mm,z_mm\n");
            for (i, p) in tips.iter().enumerate() {
                let _ = writeln!(out, "{i},{},{},{}", sig6(p.x), sig6(p.y), sig6(p.z));
            }
            if format == Format::Text {
                out.push_str(&summary);
            }
            out
        }
    };
    // In CSV mode the fit goes to stderr so the table stays machine-readable.
    let side = if format == Format::Csv {
        summary
    } else {
        String::new()
    };
    Ok((body, side))
}

#[derive(serde::Deserialize)]
struct TendonRow {
    joint: String,
    excursion_mm: f64,
    angle_deg: f64,
}

pub fn tendon(path: &Path, format: Format) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut by_joint: BTreeMap<JointId, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (i, row) in reader.deserialize::<TendonRow>().enumerate() {
        let row = row.with_context(|| format!("{}: malformed row {}", path.display(), i + 2))?;
        let joint: JointId = row
            .joint
            .parse()
            .with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let entry = by_joint.entry(joint).or_default();
        entry.0.push(row.excursion_mm);
        entry.1.push(row.angle_deg);
    }
    if by_joint.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let mut fits = Vec::new();
    for (joint, (e, phi)) in &by_joint {
        let fit = fit_linear(e, phi).with_context(|| format!("fit for {joint}"))?;
        fits.push((joint, e.len(), fit));
    }
    Ok(match format {
        Format::Json => pretty(
            &fits
                .iter()
                .map(|(j, n, f)| json!({ "joint": j, "n": n, "a": f.slope, "b": f.intercept, "r_squared": f.r_squared }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv | Format::Text => {
            let mut out = String::from("joint,n,a_deg_per_mm,b_deg,r_squared\n");
            for (j, n, f) in &fits {
                let _ = writeln!(out, "{j},{n},{},{},{}", sig6(f.slope), sig6(f.intercept), sig6(f.r_squared));
            }
            out
        }
    })
}

pub fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
