//! Figure-ready series: ξ_access on the x axis, mean/min/max across seeds on y.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::handover::Mode;
use crate::rach::{AccessThreshold, RachProcedure};

use super::{fmt_opt, ResultRow, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// CHO: HOF rate and CBRA ratio per (procedure, N_B).
    F4,
    /// BHO: same layout as F4.
    F5,
    /// Total failure rate per (mode, N_B).
    F6,
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::F4, Figure::F5, Figure::F6];

    pub fn name(self) -> &'static str {
        match self {
            Figure::F4 => "f4",
            Figure::F5 => "f5",
            Figure::F6 => "f6",
        }
    }

    fn mode(self) -> Option<Mode> {
        match self {
            Figure::F4 => Some(Mode::Cho),
            Figure::F5 => Some(Mode::Bho),
            Figure::F6 => None,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f4" => Ok(Figure::F4),
            "f5" => Ok(Figure::F5),
            "f6" => Ok(Figure::F6),
            other => Err(Error::config(format!("unknown figure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Stat { mean, min, max })
    }
}

/// Which curve a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesKey {
    Procedure(RachProcedure, usize),
    Mode(Mode, usize),
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKey::Procedure(p, n) => write!(f, "{p} N_B={n}"),
            SeriesKey::Mode(m, n) => write!(f, "{m} N_B={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub key: SeriesKey,
    pub xi: AccessThreshold,
    /// Position of `xi` in the sorted threshold grid, usable as a plot abscissa.
    pub xi_index: usize,
    pub seeds: usize,
    /// One entry per y column of the figure (see [`FigureSeries::y_names`]).
    pub y: Vec<Option<Stat>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub figure: Figure,
    pub y_names: Vec<&'static str>,
    pub rows: Vec<FigureRow>,
}

impl FigureSeries {
    pub fn series(&self) -> BTreeSet<SeriesKey> {
        self.rows.iter().map(|r| r.key).collect()
    }

    pub fn row(&self, key: SeriesKey, xi: AccessThreshold) -> Option<&FigureRow> {
        self.rows.iter().find(|r| r.key == key && r.xi == xi)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = match self.figure {
            Figure::F6 => vec!["mode".into()],
            _ => vec!["procedure".into()],
        };
        header.extend(["n_b", "xi_index", "xi_access_dbm", "seeds"].map(String::from));
        for y in &self.y_names {
            for s in ["mean", "min", "max"] {
                header.push(format!("{y}_{s}"));
            }
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let (name, n_b) = match r.key {
                SeriesKey::Procedure(p, n) => (p.to_string(), n),
                SeriesKey::Mode(m, n) => (m.to_string(), n),
            };
            let mut rec = vec![name, n_b.to_string(), r.xi_index.to_string(), r.xi.to_string(), r.seeds.to_string()];
            for s in &r.y {
                rec.push(fmt_opt(s.map(|s| s.mean)));
                rec.push(fmt_opt(s.map(|s| s.min)));
                rec.push(fmt_opt(s.map(|s| s.max)));
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn sorted_xis<'a>(rows: impl Iterator<Item = &'a ResultRow>) -> Vec<AccessThreshold> {
    let mut xis: Vec<AccessThreshold> = rows.map(|r| r.variant.xi).collect();
    xis.sort_by(|a, b| a.0.total_cmp(&b.0));
    xis.dedup();
    xis
}

/// Aggregate a result set into the series of one figure.
pub fn emit_figure_series(results: &ResultSet, figure: Figure) -> Result<FigureSeries> {
    let rows: Vec<&ResultRow> = results
        .rows
        .iter()
        .filter(|r| figure.mode().is_none_or(|m| r.variant.mode == m))
        .collect();
    if rows.is_empty() {
        let what = match figure.mode() {
            Some(m) => format!("{figure} needs {m} results"),
            None => format!("{figure} needs at least one result row"),
        };
        return Err(Error::MissingAxisCoverage(what));
    }
    let xis = sorted_xis(rows.iter().copied());
    let xi_index = |xi: AccessThreshold| xis.iter().position(|x| *x == xi).expect("xi in grid");

    // (series, xi index) -> seed -> samples
    let mut groups: BTreeMap<(SeriesKey, usize), BTreeMap<u64, Vec<&ResultRow>>> = BTreeMap::new();
    for r in &rows {
        let v = r.variant;
        let key = match figure {
            Figure::F6 => SeriesKey::Mode(v.mode, v.n_b),
            _ => SeriesKey::Procedure(v.procedure, v.n_b),
        };
        groups
            .entry((key, xi_index(v.xi)))
            .or_default()
            .entry(r.seed)
            .or_default()
            .push(r);
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let y_names = match figure {
        Figure::F6 => vec!["total_per_ue_min"],
        _ => vec!["hof_per_ue_min", "r_cbra_pct"],
    };
    let out = groups
        .into_iter()
        .map(|((key, xi_index), by_seed)| {
            let y = match figure {
                // procedures sharing a seed are averaged before the spread across seeds
                Figure::F6 => {
                    let totals: Vec<f64> = by_seed
                        .values()
                        .map(|rs| {
                            let t: Vec<f64> = rs.iter().map(|r| r.counters.normalized_failures().total_per_ue_min).collect();
                            mean(&t)
                        })
                        .collect();
                    vec![Stat::of(&totals)]
                }
                _ => {
                    let hof: Vec<f64> = by_seed
                        .values()
                        .flatten()
                        .map(|r| r.counters.normalized_failures().hof_per_ue_min)
                        .collect();
                    let ratio: Vec<f64> = by_seed.values().flatten().filter_map(|r| r.r_cbra()).collect();
                    vec![Stat::of(&hof), Stat::of(&ratio)]
                }
            };
            FigureRow {
                key,
                xi: xis[xi_index],
                xi_index,
                seeds: by_seed.len(),
                y,
            }
        })
        .collect();
    Ok(FigureSeries {
        figure,
        y_names,
        rows: out,
    })
}

/// Gnuplot script plotting `<figure>.csv` from the same directory, one curve
/// (with min/max error bars) per series and y column.
pub fn gnuplot_script(figure: Figure, series: &FigureSeries) -> String {
    let name = figure.name();
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot {name}.gp");
    let _ = writeln!(s, "set datafile separator \",\"");
    let _ = writeln!(s, "set datafile missing \"NaN\"");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output \"{name}.png\"");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set xlabel \"xi_access (dBm)\"");
    let _ = writeln!(s, "set offsets 0.3, 0.3, 0, 0");
    match figure {
        Figure::F6 => {
            let _ = writeln!(s, "set ylabel \"failures per UE and minute\"");
        }
        _ => {
            let _ = writeln!(s, "set ylabel \"HOF per UE and minute\"");
            let _ = writeln!(s, "set y2label \"R_CBRA (%)\"");
            let _ = writeln!(s, "set ytics nomirror");
            let _ = writeln!(s, "set y2tics");
            let _ = writeln!(s, "set y2range [0:100]");
        }
    }
    let mut curves = Vec::new();
    for key in series.series() {
        let (label, n_b) = match key {
            SeriesKey::Procedure(p, n) => (p.to_string(), n),
            SeriesKey::Mode(m, n) => (m.to_string(), n),
        };
        let cond = format!("(strcol(1) eq \"{label}\" && $2 == {n_b})");
        for (i, y) in series.y_names.iter().enumerate() {
            let col = 6 + 3 * i;
            let axes = if i == 1 { " axes x1y2" } else { "" };
            curves.push(format!(
                "  \"{name}.csv\" skip 1 using 3:({cond} ? ${col} : NaN):{}:{}:xtic(4){axes} with yerrorlines title \"{key} {y}\"",
                col + 1,
                col + 2
            ));
        }
    }
    let _ = writeln!(s, "plot \\\n{}", curves.join(", \\\n"));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpi::KpiCounters;
    use crate::sim::Variant;

    fn row(mode: Mode, procedure: RachProcedure, xi: f64, seed: u64, hof: u64, cbra: u64, cfra: u64) -> ResultRow {
        let mut counters = KpiCounters::new(10, 1.0);
        counters.n_hof = hof;
        counters.n_cbra = cbra;
        counters.n_cfra = cfra;
        ResultRow {
            variant: Variant {
                mode,
                procedure,
                xi: AccessThreshold(xi),
                n_b: 4,
            },
            seed,
            counters,
            trajectory_hash: String::new(),
        }
    }

    #[test]
    fn single_seed_degenerates() {
        let rs = ResultSet {
            rows: vec![row(Mode::Cho, RachProcedure::Proposed, -100.0, 1, 3, 1, 3)],
        };
        let f = emit_figure_series(&rs, Figure::F4).unwrap();
        let s = f.rows[0].y[0].unwrap();
        assert_eq!((s.mean, s.min, s.max), (0.3, 0.3, 0.3));
        let r = f.rows[0].y[1].unwrap();
        assert_eq!((r.mean, r.min, r.max), (25.0, 25.0, 25.0));
    }

    #[test]
    fn missing_mode_is_reported() {
        let rs = ResultSet {
            rows: vec![row(Mode::Cho, RachProcedure::Proposed, -100.0, 1, 0, 0, 0)],
        };
        let e = emit_figure_series(&rs, Figure::F5).unwrap_err();
        assert!(matches!(e, Error::MissingAxisCoverage(_)));
    }

    #[test]
    fn xi_sorted_with_sentinels() {
        let rs = ResultSet {
            rows: vec![
                row(Mode::Bho, RachProcedure::ThreeGpp, f64::INFINITY, 1, 0, 1, 0),
                row(Mode::Bho, RachProcedure::ThreeGpp, -90.0, 1, 0, 1, 0),
                row(Mode::Bho, RachProcedure::ThreeGpp, f64::NEG_INFINITY, 1, 0, 0, 0),
            ],
        };
        let f = emit_figure_series(&rs, Figure::F5).unwrap();
        let xis: Vec<String> = f.rows.iter().map(|r| r.xi.to_string()).collect();
        assert_eq!(xis, ["-inf", "-90", "+inf"]);
        // no accesses at -inf: ratio undefined, not zero
        assert!(f.rows[0].y[1].is_none());
        assert!(f.to_csv_string().unwrap().contains("NaN"));
    }

    #[test]
    fn f6_one_series_per_mode_and_nb() {
        let rs = ResultSet {
            rows: vec![
                row(Mode::Bho, RachProcedure::ThreeGpp, -90.0, 1, 0, 1, 0),
                row(Mode::Bho, RachProcedure::Proposed, -90.0, 1, 0, 1, 0),
                row(Mode::Cho, RachProcedure::ThreeGpp, -90.0, 1, 2, 1, 0),
                row(Mode::Cho, RachProcedure::Proposed, -90.0, 1, 2, 1, 0),
            ],
        };
        let f = emit_figure_series(&rs, Figure::F6).unwrap();
        assert_eq!(f.series().len(), 2);
        assert_eq!(f.rows.len(), 2);
        assert_eq!(f.rows[1].seeds, 1);
        assert!(gnuplot_script(Figure::F6, &f).contains("CHO N_B=4"));
    }
}
