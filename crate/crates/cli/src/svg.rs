//! Minimal static SVG plotting: points, polylines, and linear axes with
//! ticks. Values are formatted with fixed precision so identical inputs
//! produce identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            body: String::new(),
        }
    }

    /// Fix the data ranges; call before adding series.
    pub fn with_ranges(mut self, points: &[(f64, f64)]) -> Self {
        let finite: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if finite.is_empty() {
            return self;
        }
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pad_y = 0.05 * (y1 - y0);
        self.x_range = (x0, x1);
        self.y_range = (y0 - pad_y, y1 + pad_y);
        self
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let fy = (y - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (
            MARGIN_L + fx * (WIDTH - MARGIN_L - MARGIN_R),
            HEIGHT - MARGIN_B - fy * (HEIGHT - MARGIN_T - MARGIN_B),
        )
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, label: Option<&str>) {
        let mapped: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (px, py) = self.map(x, y);
                format!("{},{}", fmt(px), fmt(py))
            })
            .collect();
        if mapped.len() < 2 {
            return;
        }
        writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            mapped.join(" ")
        )
        .unwrap();
        if let Some(text) = label {
            if let Some(&(x, y)) = points
                .iter()
                .rev()
                .find(|(x, y)| x.is_finite() && y.is_finite())
            {
                let (px, py) = self.map(x, y);
                writeln!(
                    self.body,
                    "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{text}</text>",
                    fmt(px - 60.0),
                    fmt(py - 6.0)
                )
                .unwrap();
            }
        }
    }

    pub fn points(&mut self, points: &[(f64, f64)], color: &str) {
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let (px, py) = self.map(x, y);
            writeln!(
                self.body,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.2\" fill=\"{color}\"/>",
                fmt(px),
                fmt(py)
            )
            .unwrap();
        }
    }

    pub fn render(self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        )
        .unwrap();
        writeln!(
            out,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            fmt(WIDTH / 2.0),
            self.title
        )
        .unwrap();
        // frame
        writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            fmt(MARGIN_L),
            fmt(MARGIN_T),
            fmt(WIDTH - MARGIN_L - MARGIN_R),
            fmt(HEIGHT - MARGIN_T - MARGIN_B)
        )
        .unwrap();
        // ticks
        for i in 0..=5 {
            let fx = i as f64 / 5.0;
            let x = self.x_range.0 + fx * (self.x_range.1 - self.x_range.0);
            let px = MARGIN_L + fx * (WIDTH - MARGIN_L - MARGIN_R);
            writeln!(
                out,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>",
                fmt(px),
                fmt(HEIGHT - MARGIN_B),
                fmt(HEIGHT - MARGIN_B + 5.0)
            )
            .unwrap();
            writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                fmt(px),
                fmt(HEIGHT - MARGIN_B + 18.0),
                format_args!("{x:.3}")
            )
            .unwrap();
            let fy = i as f64 / 5.0;
            let y = self.y_range.0 + fy * (self.y_range.1 - self.y_range.0);
            let py = HEIGHT - MARGIN_B - fy * (HEIGHT - MARGIN_T - MARGIN_B);
            writeln!(
                out,
                "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\"/>",
                fmt(MARGIN_L - 5.0),
                fmt(MARGIN_L),
                fmt(py)
            )
            .unwrap();
            writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                fmt(MARGIN_L - 8.0),
                fmt(py + 4.0),
                format_args!("{y:.3}")
            )
            .unwrap();
        }
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
            fmt(HEIGHT - 12.0),
            self.x_label
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            fmt(HEIGHT / 2.0),
            fmt(HEIGHT / 2.0),
            self.y_label
        )
        .unwrap();
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}
