use std::fmt::Write;

use super::{Instance, Resource, Schedule, Stage};

const ROWS: [(&str, &[Resource]); 3] = [
    ("Arm1", &[Resource::Arm1S1, Resource::Arm1S3]),
    ("Arm2", &[Resource::Arm2S1, Resource::Arm2S3]),
    ("ExternalAxis", &[Resource::ExternalAxisS2]),
];

const LABEL_W: f64 = 110.0;
const CHART_W: f64 = 900.0;
const ROW_H: f64 = 36.0;
const TOP: f64 = 30.0;

fn fill(stage: Stage) -> &'static str {
    match stage {
        Stage::ToolChange => "#e8a33d",
        Stage::PoseAdjust => "#6a9fd8",
        Stage::Disassembly => "#7fbf7f",
    }
}

/// Gantt chart with one row per arm and one for the external axis.
pub fn gantt_svg(inst: &Instance, schedule: &Schedule) -> String {
    let span = schedule.makespan_ms.max(1) as f64;
    let x = |ms: u64| LABEL_W + CHART_W * ms as f64 / span;
    let height = TOP + ROW_H * ROWS.len() as f64 + 40.0;
    let width = LABEL_W + CHART_W + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (row, (name, resources)) in ROWS.iter().enumerate() {
        let y = TOP + ROW_H * row as f64;
        let _ = writeln!(
            s,
            r##"<text x="8" y="{:.1}">{name}</text><line x1="{LABEL_W:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ccc"/>"##,
            y + ROW_H / 2.0 + 4.0,
            y + ROW_H,
            LABEL_W + CHART_W,
            y + ROW_H
        );
        for t in inst.tasks.iter().filter(|t| resources.contains(&t.resource)) {
            let (a, b) = (schedule.starts[t.id], schedule.end(inst, t.id));
            let label = match (t.stage, t.part) {
                (Stage::Disassembly, Some(p)) => p.to_string(),
                (Stage::ToolChange, _) => "TC".to_string(),
                (Stage::PoseAdjust, _) => "PA".to_string(),
                (_, None) => format!("J{}", t.job),
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}" stroke="black" stroke-width="0.5"><title>job {} stage {} {}..{} ms</title></rect><text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                x(a),
                y + 6.0,
                (x(b) - x(a)).max(0.5),
                ROW_H - 12.0,
                fill(t.stage),
                t.job,
                t.stage as u8,
                a,
                b,
                (x(a) + x(b)) / 2.0,
                y + ROW_H / 2.0 + 4.0
            );
        }
    }
    let axis_y = TOP + ROW_H * ROWS.len() as f64 + 16.0;
    let ticks = 10u64;
    for k in 0..=ticks {
        let ms = schedule.makespan_ms * k / ticks;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{axis_y:.1}" text-anchor="middle">{:.1}s</text>"#,
            x(ms),
            ms as f64 / 1000.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::super::{build_instance, solve, JobSpec, SolverConfig};
    use super::*;
    use crate::model::Arm;

    #[test]
    fn rows_and_boxes() {
        let inst = build_instance(
            &[
                JobSpec {
                    arm: Arm::One,
                    toolchange_ms: Some(10_000),
                    pose_adjust_ms: Some(2000),
                    disassembly_ms: 4000,
                    part: None,
                },
                JobSpec {
                    arm: Arm::Two,
                    toolchange_ms: None,
                    pose_adjust_ms: None,
                    disassembly_ms: 3000,
                    part: None,
                },
            ],
            false,
        )
        .unwrap();
        let s = solve(&inst, &SolverConfig::default()).unwrap();
        let svg = gantt_svg(&inst, &s);
        for row in ["Arm1", "Arm2", "ExternalAxis"] {
            assert!(svg.contains(&format!(">{row}</text>")));
        }
        assert_eq!(svg.matches("<rect x=").count(), 4);
        assert!(svg.ends_with("</svg>\n"));
    }
}
