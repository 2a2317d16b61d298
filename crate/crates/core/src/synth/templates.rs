use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::stroke::Task;

/// A planned pen-down path in millimetres.
pub type Polyline = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmtTarget {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// Target positions for both trail-making tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmtLayout {
    pub canvas_mm: [f64; 2],
    pub target_radius_mm: f64,
    pub tmt_a: Vec<TmtTarget>,
    pub tmt_b: Vec<TmtTarget>,
}

const DEFAULT_LAYOUT: &str = include_str!("../../data/tmt_layout.json");

impl TmtLayout {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// The layout shipped with the crate: 25 targets per task on a
    /// 200 × 140 mm canvas.
    pub fn builtin() -> &'static TmtLayout {
        static LAYOUT: OnceLock<TmtLayout> = OnceLock::new();
        LAYOUT.get_or_init(|| TmtLayout::from_json(DEFAULT_LAYOUT.as_bytes()).expect("bundled layout parses"))
    }
}

fn circle(cx: f64, cy: f64, r: f64, start: f64, sweep: f64, n: usize) -> Polyline {
    (0..=n)
        .map(|i| {
            let a = start + sweep * i as f64 / n as f64;
            [cx + r * a.cos(), cy + r * a.sin()]
        })
        .collect()
}

fn pentagon(cx: f64, cy: f64, r: f64, rot: f64) -> Polyline {
    (0..=5)
        .map(|i| {
            let a = rot + TAU * i as f64 / 5.0;
            [cx + r * a.cos(), cy + r * a.sin()]
        })
        .collect()
}

/// A cursive-like word: a run of loops along a baseline.
fn word(x0: f64, y0: f64, loops: usize) -> Polyline {
    let n = loops * 16;
    (0..=n)
        .map(|i| {
            let u = i as f64 / 16.0;
            [x0 + 4.0 * u + 1.8 * (TAU * u).sin(), y0 + 3.5 * (1.0 - (TAU * u).cos())]
        })
        .collect()
}

fn trail(targets: &[TmtTarget]) -> Polyline {
    targets.iter().map(|t| [t.x, t.y]).collect()
}

/// Pen-down paths for `task`, in drawing order.
pub fn template(task: Task, layout: &TmtLayout) -> Vec<Polyline> {
    match task {
        Task::Sentence => {
            let lengths = [3, 5, 2, 6, 4];
            let mut x = 10.0;
            lengths
                .iter()
                .map(|&l| {
                    let w = word(x, 40.0, l);
                    x += 4.0 * l as f64 + 8.0;
                    w
                })
                .collect()
        }
        Task::Pentagon => vec![pentagon(50.0, 50.0, 22.0, -PI / 2.0), pentagon(82.0, 50.0, 22.0, PI / 2.0)],
        Task::TmtA => vec![trail(&layout.tmt_a)],
        Task::TmtB => vec![trail(&layout.tmt_b)],
        Task::Cdt => {
            let (cx, cy) = (60.0, 60.0);
            let mut strokes = vec![circle(cx, cy, 45.0, -PI / 2.0, TAU, 96)];
            for h in 1..=12 {
                // numerals as short ticks inside the rim
                let a = -PI / 2.0 + TAU * h as f64 / 12.0;
                let (c, s) = (a.cos(), a.sin());
                strokes.push(vec![[cx + 36.0 * c, cy + 36.0 * s], [cx + 39.0 * c + 1.5 * s, cy + 39.0 * s - 1.5 * c], [cx + 40.0 * c, cy + 40.0 * s]]);
            }
            // ten o'clock: hour hand to 10, minute hand to 12
            let hour = -PI / 2.0 + TAU * 10.0 / 12.0;
            let minute = -PI / 2.0;
            strokes.push(vec![[cx, cy], [cx + 22.0 * hour.cos(), cy + 22.0 * hour.sin()]]);
            strokes.push(vec![[cx, cy], [cx + 33.0 * minute.cos(), cy + 33.0 * minute.sin()]]);
            strokes
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_layout() {
        let l = TmtLayout::builtin();
        assert_eq!(l.tmt_a.len(), 25);
        assert_eq!(l.tmt_b.len(), 25);
        let b: Vec<&str> = l.tmt_b.iter().take(4).map(|t| t.label.as_str()).collect();
        assert_eq!(b, ["1", "A", "2", "B"]);
        assert_eq!(l.tmt_b.last().unwrap().label, "13");
        for t in l.tmt_a.iter().chain(&l.tmt_b) {
            assert!(t.x > 0.0 && t.x < l.canvas_mm[0] && t.y > 0.0 && t.y < l.canvas_mm[1]);
        }
    }

    #[test]
    fn every_task_has_paths() {
        for task in Task::ALL {
            let t = template(task, TmtLayout::builtin());
            assert!(!t.is_empty());
            assert!(t.iter().all(|p| p.len() >= 2));
        }
        assert_eq!(template(Task::Cdt, TmtLayout::builtin()).len(), 15);
    }
}
