//! Gantt charts as standalone SVG: one lane per device, one bar per group
//! spanning its start and finish, striped by member. Stripe colour depends
//! only on the member's original job id, so the same job has the same
//! colour in an LO chart and an LOCC chart.

use std::fmt::Write as _;

use cutsched_core::scheduler::Schedule;
use cutsched_core::sim::{Trace, TraceEvent};
use cutsched_core::workload::Stage;
use cutsched_core::Seconds;

#[derive(Debug, Clone, PartialEq)]
pub struct BarMember {
    pub id: String,
    pub root: String,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub device: String,
    pub start: Seconds,
    pub finish: Seconds,
    pub members: Vec<BarMember>,
}

pub fn bars_from_schedule(schedule: &Schedule) -> Vec<Bar> {
    schedule
        .placements
        .iter()
        .map(|p| Bar {
            device: p.device.clone(),
            start: p.start,
            finish: p.finish,
            members: p
                .group
                .members
                .iter()
                .map(|m| BarMember {
                    id: m.id.clone(),
                    root: m.root_id().to_string(),
                    stage: m.stage,
                })
                .collect(),
        })
        .collect()
}

pub fn bars_from_trace(trace: &Trace) -> Vec<Bar> {
    trace
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::GroupStart {
                time,
                device,
                finish,
                members,
                ..
            } => Some(Bar {
                device: device.clone(),
                start: *time,
                finish: *finish,
                members: members
                    .iter()
                    .map(|m| BarMember {
                        id: m.id.clone(),
                        root: m.root.clone(),
                        stage: m.stage,
                    })
                    .collect(),
            }),
            _ => None,
        })
        .collect()
}

/// Stable colour for an original job id (FNV-1a hash to a hue).
pub fn job_color(root: &str) -> String {
    let mut h: u32 = 0x811c_9dc5;
    for b in root.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    let hue = h % 360;
    let light = 45 + (h >> 9) % 20;
    format!("hsl({hue},65%,{light}%)")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 1200.0;
const LEFT: f64 = 110.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const LANE: f64 = 30.0;
const AXIS: f64 = 30.0;

/// Renders `bars` on one lane per entry of `lanes` (devices without bars
/// still get an empty lane).
pub fn render_svg(title: &str, lanes: &[String], bars: &[Bar]) -> String {
    let span = bars.iter().map(|b| b.finish).fold(0.0, f64::max);
    let scale = if span > 0.0 { (WIDTH - LEFT - RIGHT) / span } else { 0.0 };
    let height = TOP + LANE * lanes.len() as f64 + AXIS;
    let x = |t: f64| LEFT + t * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, lane) in lanes.iter().enumerate() {
        let y = TOP + LANE * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + LANE / 2.0 + 4.0,
            escape(lane)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y2}" x2="{}" y2="{y2}" stroke="#000" stroke-width="1"/>"##,
            WIDTH - RIGHT,
            y2 = y + LANE
        );
    }
    let axis_y = TOP + LANE * lanes.len() as f64;
    for k in 0..=5 {
        let t = span * f64::from(k) / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.2} s</text>"#,
            x(t),
            axis_y + 18.0
        );
    }

    for bar in bars {
        let Some(lane) = lanes.iter().position(|l| *l == bar.device) else {
            continue;
        };
        let y = TOP + LANE * lane as f64 + 3.0;
        let h = LANE - 6.0;
        let (x0, w) = (x(bar.start), (bar.finish - bar.start) * scale);
        let names: Vec<&str> = bar.members.iter().map(|m| m.id.as_str()).collect();
        let _ = writeln!(
            s,
            r#"<g class="bar" data-device="{}" data-start="{}" data-finish="{}">"#,
            escape(&bar.device),
            bar.start,
            bar.finish
        );
        let _ = writeln!(
            s,
            "<title>{} [{:.3}, {:.3}] {}</title>",
            escape(&bar.device),
            bar.start,
            bar.finish,
            escape(&names.join(", "))
        );
        let stripe = h / bar.members.len().max(1) as f64;
        for (k, m) in bar.members.iter().enumerate() {
            let opacity = if m.stage == Stage::Downstream { 0.6 } else { 1.0 };
            let _ = writeln!(
                s,
                r#"<rect class="member" x="{x0:.3}" y="{:.3}" width="{w:.3}" height="{stripe:.3}" fill="{}" fill-opacity="{opacity}"/>"#,
                y + stripe * k as f64,
                job_color(&m.root)
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="#333" stroke-width="0.5"/>"##
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
