//! Region-labeled transmittance maps and their text format.
//!
//! ```text
//! 4 2
//! AABB
//! AACC
//! A t=1.0
//! B t=0.87
//! C layers=3 t_mono=0.977
//! ```
//!
//! Line 1 is `width height`, then `height` rows of exactly `width`
//! single-character labels, then one legend line per label.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ScanError;

/// Nominal pixel pitch, metadata only.
pub const DEFAULT_PIXEL_PITCH_NM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionTransmittance {
    Direct(f64),
    /// `t = t_mono^layers`.
    Layers { layers: u32, t_mono: f64 },
}

impl RegionTransmittance {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Direct(t) => t,
            Self::Layers { layers, t_mono } => t_mono.powi(layers as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMap {
    width: usize,
    height: usize,
    pub pixel_pitch_nm: f64,
    labels: Vec<char>,
    legend: BTreeMap<char, RegionTransmittance>,
}

fn check_t(t: f64) -> bool {
    t.is_finite() && (0.0..=1.0).contains(&t)
}

impl SampleMap {
    /// `labels` is row-major, `width * height` long.
    pub fn new(
        width: usize,
        height: usize,
        labels: Vec<char>,
        legend: BTreeMap<char, RegionTransmittance>,
    ) -> Result<Self, ScanError> {
        if width == 0 || height == 0 {
            return Err(ScanError::InvalidMap("map must be at least 1x1".into()));
        }
        if labels.len() != width * height {
            return Err(ScanError::InvalidMap(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        if let Some(c) = labels.iter().find(|c| !legend.contains_key(c)) {
            return Err(ScanError::UnknownRegion(*c));
        }
        for (label, region) in &legend {
            let t = region.value();
            if !check_t(t) {
                return Err(ScanError::InvalidMap(format!(
                    "region {label} transmittance {t} not in [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            pixel_pitch_nm: DEFAULT_PIXEL_PITCH_NM,
            labels,
            legend,
        })
    }

    /// Vertical bands spanning every row, left to right.
    pub fn bands(height: usize, bands: &[(char, usize, f64)]) -> Result<Self, ScanError> {
        let width: usize = bands.iter().map(|b| b.1).sum();
        let row: Vec<char> = bands
            .iter()
            .flat_map(|&(c, w, _)| std::iter::repeat_n(c, w))
            .collect();
        let labels = (0..height).flat_map(|_| row.iter().copied()).collect();
        let legend = bands
            .iter()
            .map(|&(c, _, t)| (c, RegionTransmittance::Direct(t)))
            .collect();
        Self::new(width, height, labels, legend)
    }

    pub fn parse(text: &str) -> Result<Self, ScanError> {
        let err = |line: usize, message: String| ScanError::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (n, header) = lines.next().ok_or_else(|| err(1, "empty map file".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| err(n, format!("bad dimension `{s}`: {e}")))
        };
        let (width, height) = match dims.as_slice() {
            [w, h] => (parse_dim(w)?, parse_dim(h)?),
            _ => return Err(err(n, "expected `width height`".into())),
        };
        if width == 0 || height == 0 {
            return Err(err(n, "dimensions must be positive".into()));
        }

        let mut labels = Vec::with_capacity(width * height);
        for row in 0..height {
            let (n, line) = lines
                .next()
                .ok_or_else(|| err(row + 2, format!("missing grid row {}", row + 1)))?;
            let cells: Vec<char> = line.trim_end_matches('\r').chars().collect();
            if cells.len() != width {
                return Err(err(n, format!("expected {width} labels, found {}", cells.len())));
            }
            if let Some(c) = cells.iter().find(|c| c.is_whitespace()) {
                return Err(err(n, format!("whitespace label {c:?}")));
            }
            labels.extend(cells);
        }

        let mut legend = BTreeMap::new();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let label = parts.next().expect("non-empty line");
            let mut chars = label.chars();
            let (Some(label), None) = (chars.next(), chars.next()) else {
                return Err(err(n, format!("legend label `{label}` must be one character")));
            };
            let mut t = None;
            let mut layers = None;
            let mut t_mono = None;
            for kv in parts {
                let (key, value) = kv
                    .split_once('=')
                    .ok_or_else(|| err(n, format!("expected key=value, found `{kv}`")))?;
                let as_f64 = || {
                    value
                        .parse::<f64>()
                        .map_err(|e| err(n, format!("bad value for {key}: {e}")))
                };
                match key {
                    "t" => t = Some(as_f64()?),
                    "t_mono" => t_mono = Some(as_f64()?),
                    "layers" => {
                        layers = Some(
                            value
                                .parse::<u32>()
                                .map_err(|e| err(n, format!("bad value for layers: {e}")))?,
                        )
                    }
                    other => return Err(err(n, format!("unknown legend key `{other}`"))),
                }
            }
            let region = match (t, layers, t_mono) {
                (Some(t), None, None) => RegionTransmittance::Direct(t),
                (None, Some(layers), Some(t_mono)) => RegionTransmittance::Layers { layers, t_mono },
                _ => {
                    return Err(err(
                        n,
                        "legend needs either `t=<float>` or `layers=<int> t_mono=<float>`".into(),
                    ))
                }
            };
            if !check_t(region.value()) || t_mono.is_some_and(|m| !check_t(m)) {
                return Err(err(n, format!("transmittance for {label} not in [0, 1]")));
            }
            if legend.insert(label, region).is_some() {
                return Err(err(n, format!("duplicate legend entry for {label}")));
            }
        }
        if let Some(c) = labels.iter().find(|c| !legend.contains_key(c)) {
            return Err(ScanError::UnknownRegion(*c));
        }
        Self::new(width, height, labels, legend)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for row in self.labels.chunks(self.width) {
            out.extend(row.iter());
            out.push('\n');
        }
        for (label, region) in &self.legend {
            match region {
                RegionTransmittance::Direct(t) => writeln!(out, "{label} t={t}"),
                RegionTransmittance::Layers { layers, t_mono } => {
                    writeln!(out, "{label} layers={layers} t_mono={t_mono}")
                }
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.labels.len()
    }

    /// Row-major labels.
    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> char {
        self.labels[y * self.width + x]
    }

    pub fn legend(&self) -> &BTreeMap<char, RegionTransmittance> {
        &self.legend
    }

    pub fn transmittance(&self, label: char) -> Option<f64> {
        self.legend.get(&label).map(RegionTransmittance::value)
    }

    /// Labels that occur in the grid, sorted.
    pub fn regions(&self) -> Vec<char> {
        let mut seen: Vec<char> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// Highest-transmittance region present in the grid; ties go to the
    /// smallest label.
    pub fn reference_label(&self) -> char {
        let regions = self.regions();
        let mut best = regions[0];
        for &r in &regions[1..] {
            if self.transmittance(r) > self.transmittance(best) {
                best = r;
            }
        }
        best
    }
}
