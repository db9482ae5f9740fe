//! Episode logs (JSON lines), batch summaries (CSV) and top-down SVG views.

use std::fmt::Write as _;
use std::io::Write;

use beings_core::{CellGrid, Error, Result};

use crate::episode::EpisodeResult;
use crate::metrics::Summary;
use crate::tasks::Task;

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Every step record of every trial, one JSON object per line, in trial order.
pub fn write_episode_log<W: Write>(mut w: W, results: &[EpisodeResult]) -> Result<()> {
    for r in results {
        for rec in &r.records {
            serde_json::to_writer(&mut w, rec).map_err(io_err)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn episode_log_string(results: &[EpisodeResult]) -> String {
    let mut buf = Vec::new();
    write_episode_log(&mut buf, results).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// One header row `SR,SPC,NE,NS_min,NS_mean` and one value row.
pub fn write_summary_csv<W: Write>(w: W, summary: &Summary) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.serialize(summary).map_err(io_err)?;
    csv.flush()?;
    Ok(())
}

/// Pixels per meter in the SVG view.
const SCALE: f64 = 50.0;
const MARGIN: f64 = 20.0;

/// Top-down view: belief shading of the last snapshot, obstacles, the executed
/// trajectory, the goal, and the best predicted rollout at every planned step
/// (all rollouts of the first step in a lighter stroke) when they were recorded.
pub fn episode_svg(task: &Task, grid: &CellGrid<f64>, result: &EpisodeResult) -> String {
    let b = task.scene.bounds();
    let (w, h) = (b.size().x * SCALE + 2.0 * MARGIN, b.size().y * SCALE + 2.0 * MARGIN);
    // SVG y grows downward; world y grows north.
    let px = |x: f64| MARGIN + (x - b.min.x) * SCALE;
    let py = |y: f64| MARGIN + (b.max.y - y) * SCALE;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);

    if let Some(masses) = result.belief_snapshots.last() {
        let peak = masses.iter().copied().fold(0.0, f64::max);
        if peak > 0.0 {
            let side = grid.cell_size() * SCALE;
            for (i, m) in masses.iter().enumerate() {
                let (cx, cy) = grid.cell_center(i);
                let half = grid.cell_size() / 2.0;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="rgb(40,90,200)" fill-opacity="{:.4}"/>"#,
                    px(cx - half),
                    py(cy + half),
                    0.6 * m / peak
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="2"/>"#,
        px(b.min.x),
        py(b.max.y),
        b.size().x * SCALE,
        b.size().y * SCALE
    );
    for o in task.scene.obstacles() {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb(90,90,100)"/>"#,
            px(o.min.x),
            py(o.max.y),
            o.size().x * SCALE,
            o.size().y * SCALE
        );
    }

    let polyline = |pts: &mut dyn Iterator<Item = (f64, f64)>| pts.map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect::<Vec<_>>().join(" ");
    let mut first_fan = true;
    for rec in &result.records {
        let Some(rollouts) = &rec.rollouts else { continue };
        if first_fan {
            for r in rollouts {
                let pts = polyline(&mut r.iter().map(|p| (p[0], p[1])));
                let _ = writeln!(s, r#"<polyline points="{pts}" fill="none" stroke="rgb(240,150,60)" stroke-opacity="0.35" stroke-width="1"/>"#);
            }
            first_fan = false;
        }
        if let Some(best) = rec.best.and_then(|i| rollouts.get(i)) {
            let pts = polyline(&mut best.iter().map(|p| (p[0], p[1])));
            let _ = writeln!(s, r#"<polyline points="{pts}" fill="none" stroke="rgb(230,110,20)" stroke-width="1.5"/>"#);
        }
    }

    let pts = polyline(&mut result.trajectory.iter().map(|p| (p.x, p.y)));
    let _ = writeln!(s, r#"<polyline points="{pts}" fill="none" stroke="rgb(200,30,40)" stroke-width="2.5"/>"#);
    let arrow = |s: &mut String, x: f64, y: f64, th: f64, color: &str| {
        let (ex, ey) = (x + 0.4 * th.cos(), y + 0.4 * th.sin());
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"/>"#, px(x), py(y));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#, px(x), py(y), px(ex), py(ey));
    };
    arrow(&mut s, task.start.x, task.start.y, task.start.theta, "rgb(30,30,30)");
    let g = task.scene.goal_pose();
    arrow(&mut s, g.x, g.y, g.theta, "rgb(20,150,60)");
    s.push_str("</svg>\n");
    s
}
