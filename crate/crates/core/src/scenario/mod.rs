//! Network layout, user population and UE movement.
//!
//! A scenario file is TOML. Lengths are in meters, speeds in km/h and times
//! in ms unless a field name says otherwise. The layout is either listed
//! explicitly (`[[building]]`, `[[street]]`, `[[area]]`) or generated from a
//! `[grid]` block, or both; generated items are appended to explicit ones.

mod mobility;

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failure::RlfConfig;
use crate::geometry::{Point, Polygon, Polyline, Rect};
use crate::handover::HandoverConfig;
use crate::ids::{CellId, Step};
use crate::measurements::MeasurementConfig;
use crate::rach::RachConfig;
use crate::radio::{Cell, LinkModelConfig, RadioModel, Site};

pub use mobility::{MoveDomain, StreetNetwork, UeMobility, STREET_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// RNG stream identifiers. Each subsystem, and each UE within it, draws from
/// its own ChaCha stream so that changing one never shifts another.
pub mod streams {
    pub const PLACEMENT: u64 = 1;
    pub const MOBILITY: u64 = 2 << 32;
    pub const SHADOWING: u64 = 3 << 32;
    pub const FADING: u64 = 4 << 32;
    pub const COLLISION: u64 = 5 << 32;

    /// Stream of subsystem `base` for UE `ue`.
    pub fn for_ue(base: u64, ue: u32) -> u64 {
        base | u64::from(ue)
    }
}

/// ChaCha8 generator for `seed` positioned on `stream`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub dt_ms: u32,
    pub duration_s: f64,
    pub seed: u64,
    /// Events before this instant are not counted in the KPIs.
    pub warmup_s: f64,
    pub rx_height_m: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt_ms: 10,
            duration_s: 60.0,
            seed: 1,
            warmup_s: 5.0,
            rx_height_m: 1.5,
        }
    }
}

impl SimulationConfig {
    pub fn steps(&self) -> Step {
        (self.duration_s * 1000.0 / f64::from(self.dt_ms)).round() as Step
    }

    pub fn warmup_steps(&self) -> Step {
        (self.warmup_s * 1000.0 / f64::from(self.dt_ms)).round() as Step
    }

    /// Simulated time over which KPIs are counted.
    pub fn counted_minutes(&self) -> f64 {
        (self.steps().saturating_sub(self.warmup_steps())) as f64 * f64::from(self.dt_ms) / 60_000.0
    }
}

/// Regular block grid: `blocks_x` by `blocks_y` buildings separated by
/// streets of width `street_w_m`, with streets on the outer edges too.
/// Street centerlines form the UE street network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub block_w_m: f64,
    pub block_h_m: f64,
    pub street_w_m: f64,
    /// Blocks left without a building, turned into areas, as `[i, j, name]`.
    #[serde(default)]
    pub open_blocks: Vec<(usize, usize, String)>,
}

impl GridConfig {
    /// South-west corner of block (i, j).
    fn block_origin(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.street_w_m + i as f64 * (self.block_w_m + self.street_w_m),
            self.street_w_m + j as f64 * (self.block_h_m + self.street_w_m),
        )
    }

    pub fn block_rect(&self, i: usize, j: usize) -> Rect {
        let o = self.block_origin(i, j);
        Rect::new(o.x, o.y, o.x + self.block_w_m, o.y + self.block_h_m)
    }

    /// x (or y) of the k-th vertical (horizontal) street centerline.
    fn centerline(&self, k: usize, block: f64) -> f64 {
        0.5 * self.street_w_m + k as f64 * (block + self.street_w_m)
    }

    pub fn width(&self) -> f64 {
        self.blocks_x as f64 * self.block_w_m + (self.blocks_x + 1) as f64 * self.street_w_m
    }

    pub fn height(&self) -> f64 {
        self.blocks_y as f64 * self.block_h_m + (self.blocks_y + 1) as f64 * self.street_w_m
    }

    fn validate(&self) -> Result<()> {
        if self.blocks_x == 0 || self.blocks_y == 0 {
            return Err(Error::config("grid must have at least one block in each direction"));
        }
        if !(self.block_w_m > 0.0 && self.block_h_m > 0.0 && self.street_w_m > 0.0) {
            return Err(Error::config("grid dimensions must be positive"));
        }
        for (i, j, _) in &self.open_blocks {
            if *i >= self.blocks_x || *j >= self.blocks_y {
                return Err(Error::config(format!("open block ({i}, {j}) lies outside the grid")));
            }
        }
        Ok(())
    }

    /// Buildings, street centerlines and open-block areas.
    pub fn generate(&self) -> (Vec<Rect>, Vec<StreetConfig>, Vec<AreaConfig>) {
        let mut buildings = Vec::new();
        let mut areas = Vec::new();
        for j in 0..self.blocks_y {
            for i in 0..self.blocks_x {
                let rect = self.block_rect(i, j);
                match self.open_blocks.iter().find(|(oi, oj, _)| *oi == i && *oj == j) {
                    Some((_, _, name)) => areas.push(AreaConfig {
                        name: name.clone(),
                        polygon: Polygon::from_rect(&rect),
                    }),
                    None => buildings.push(rect),
                }
            }
        }
        let x_end = self.centerline(self.blocks_x, self.block_w_m);
        let y_end = self.centerline(self.blocks_y, self.block_h_m);
        let mut streets = Vec::new();
        for k in 0..=self.blocks_x {
            let x = self.centerline(k, self.block_w_m);
            streets.push(StreetConfig {
                name: format!("v{k}"),
                points: Polyline::new(vec![Point::new(x, 0.5 * self.street_w_m), Point::new(x, y_end)]),
            });
        }
        for k in 0..=self.blocks_y {
            let y = self.centerline(k, self.block_h_m);
            streets.push(StreetConfig {
                name: format!("h{k}"),
                points: Polyline::new(vec![Point::new(0.5 * self.street_w_m, y), Point::new(x_end, y)]),
            });
        }
        (buildings, streets, areas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreetConfig {
    #[serde(default)]
    pub name: String,
    pub points: Polyline,
}

/// Open square or pedestrian area; must be convex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub name: String,
    pub polygon: Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub position: Point,
    #[serde(default = "default_site_height")]
    pub height_m: f64,
    #[serde(default = "default_sectors")]
    pub sectors: usize,
    /// Sector boresights, degrees counter-clockwise from +x. Defaults to
    /// evenly spaced sectors starting at `first_azimuth_deg`.
    #[serde(default)]
    pub azimuths_deg: Option<Vec<f64>>,
    #[serde(default)]
    pub first_azimuth_deg: f64,
}

fn default_site_height() -> f64 {
    10.0
}

fn default_sectors() -> usize {
    3
}

impl SiteConfig {
    pub fn azimuths(&self) -> Vec<f64> {
        match &self.azimuths_deg {
            Some(a) => a.clone(),
            None => (0..self.sectors)
                .map(|k| self.first_azimuth_deg + 360.0 * k as f64 / self.sectors as f64)
                .collect(),
        }
    }
}

/// Where a group moves. Street UEs follow shortest paths between random
/// street nodes in both directions; area UEs do random waypoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum Domain {
    Streets,
    Area { area: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGroup {
    pub name: String,
    pub count: u32,
    pub speed_kmh: f64,
    #[serde(flatten)]
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default, rename = "building")]
    pub buildings: Vec<Rect>,
    #[serde(default, rename = "street")]
    pub streets: Vec<StreetConfig>,
    #[serde(default, rename = "area")]
    pub areas: Vec<AreaConfig>,
    #[serde(default, rename = "site")]
    pub sites: Vec<SiteConfig>,
    #[serde(default, rename = "group")]
    pub groups: Vec<UserGroup>,
    #[serde(default)]
    pub radio: LinkModelConfig,
    #[serde(default)]
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub handover: HandoverConfig,
    #[serde(default)]
    pub rach: RachConfig,
    #[serde(default)]
    pub rlf: RlfConfig,
}

impl Default for ScenarioConfig {
    /// Block-grid approximation of a dense European city center: 5 x 3
    /// blocks, one open square, one pedestrian block, 11 three-sector sites
    /// and 320 UEs.
    fn default() -> Self {
        let grid = GridConfig {
            blocks_x: 5,
            blocks_y: 3,
            block_w_m: 105.0,
            block_h_m: 90.0,
            street_w_m: 18.0,
            open_blocks: vec![(2, 1, "square".into()), (4, 0, "pedestrian".into())],
        };
        let sites = default_site_positions(&grid)
            .into_iter()
            .enumerate()
            .map(|(k, p)| SiteConfig {
                id: Some(format!("s{k}")),
                position: p,
                height_m: 10.0,
                sectors: 3,
                azimuths_deg: None,
                first_azimuth_deg: 30.0,
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            name: "madrid".into(),
            simulation: SimulationConfig::default(),
            grid: Some(grid),
            buildings: Vec::new(),
            streets: Vec::new(),
            areas: Vec::new(),
            sites,
            groups: vec![
                UserGroup {
                    name: "street".into(),
                    count: 200,
                    speed_kmh: 30.0,
                    domain: Domain::Streets,
                },
                UserGroup {
                    name: "square".into(),
                    count: 40,
                    speed_kmh: 3.0,
                    domain: Domain::Area { area: "square".into() },
                },
                UserGroup {
                    name: "pedestrian".into(),
                    count: 80,
                    speed_kmh: 3.0,
                    domain: Domain::Area {
                        area: "pedestrian".into(),
                    },
                },
            ],
            radio: LinkModelConfig::default(),
            measurement: MeasurementConfig::default(),
            handover: HandoverConfig::default(),
            rach: RachConfig::default(),
            rlf: RlfConfig::default(),
        }
    }
}

/// Eleven sites on building corners next to street intersections, staggered
/// over the 5 x 3 grid.
fn default_site_positions(grid: &GridConfig) -> Vec<Point> {
    // (vertical street, horizontal street) intersections
    let spots: [(usize, usize); 11] = [
        (0, 0),
        (2, 0),
        (4, 0),
        (1, 1),
        (3, 1),
        (5, 1),
        (0, 2),
        (2, 2),
        (4, 2),
        (1, 3),
        (3, 3),
    ];
    let half = 0.5 * grid.street_w_m;
    spots
        .iter()
        .map(|&(k, l)| {
            let x = grid.centerline(k, grid.block_w_m);
            let y = grid.centerline(l, grid.block_h_m);
            // north-east corner of the intersection, on the building edge
            let dx = if k < grid.blocks_x { half } else { -half };
            let dy = if l < grid.blocks_y { half } else { -half };
            Point::new(x + dx, y + dy)
        })
        .collect()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
            what: "scenario".into(),
            message: e.to_string(),
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported scenario schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ScenarioLoad {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse {
            what: "scenario".into(),
            message: e.to_string(),
        })
    }

    /// Layout with the grid expanded: (buildings, streets, areas).
    pub fn layout(&self) -> (Vec<Rect>, Vec<StreetConfig>, Vec<AreaConfig>) {
        let mut buildings = self.buildings.clone();
        let mut streets = self.streets.clone();
        let mut areas = self.areas.clone();
        if let Some(g) = &self.grid {
            let (b, s, a) = g.generate();
            buildings.extend(b);
            streets.extend(s);
            areas.extend(a);
        }
        (buildings, streets, areas)
    }

    // negated comparisons so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let sim = &self.simulation;
        if sim.dt_ms == 0 {
            return Err(Error::config("simulation.dt_ms must be positive"));
        }
        if !(sim.duration_s > 0.0) {
            return Err(Error::config("simulation.duration_s must be positive"));
        }
        if !(sim.warmup_s >= 0.0 && sim.warmup_s < sim.duration_s) {
            return Err(Error::config("simulation.warmup_s must lie in [0, duration_s)"));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        let (buildings, streets, areas) = self.layout();
        if buildings.iter().any(Rect::is_degenerate) {
            return Err(Error::config("degenerate building footprint"));
        }
        for s in &streets {
            if s.points.is_degenerate() {
                return Err(Error::config(format!("street '{}' is degenerate", s.name)));
            }
        }
        let mut names = HashSet::new();
        for a in &areas {
            if a.polygon.is_degenerate() {
                return Err(Error::config(format!("area '{}' is degenerate", a.name)));
            }
            if !a.polygon.is_convex() {
                return Err(Error::config(format!("area '{}' is not convex", a.name)));
            }
            if !names.insert(a.name.as_str()) {
                return Err(Error::config(format!("duplicate area name '{}'", a.name)));
            }
        }

        if self.sites.is_empty() {
            return Err(Error::config("scenario has no cell sites"));
        }
        let mut ids = HashSet::new();
        for (k, s) in self.sites.iter().enumerate() {
            if s.sectors == 0 {
                return Err(Error::config(format!("site {k} has zero sectors")));
            }
            if let Some(a) = &s.azimuths_deg {
                if a.len() != s.sectors {
                    return Err(Error::config(format!("site {k}: azimuths_deg must list one entry per sector")));
                }
            }
            if !(s.height_m > 0.0) {
                return Err(Error::config(format!("site {k}: height_m must be positive")));
            }
            if let Some(id) = &s.id {
                if !ids.insert(id.as_str()) {
                    return Err(Error::config(format!("duplicate site id '{id}'")));
                }
            }
        }
        let cells: usize = self.sites.iter().map(|s| s.sectors).sum();
        if cells > usize::from(u16::MAX) {
            return Err(Error::config("too many cells"));
        }

        let mut group_names = HashSet::new();
        for g in &self.groups {
            if !group_names.insert(g.name.as_str()) {
                return Err(Error::config(format!("duplicate group name '{}'", g.name)));
            }
            if !(g.speed_kmh >= 0.0) {
                return Err(Error::config(format!("group '{}': speed must be non-negative", g.name)));
            }
            match &g.domain {
                Domain::Streets if streets.is_empty() => {
                    return Err(Error::config(format!("group '{}' moves on streets but none exist", g.name)));
                }
                Domain::Area { area } if !areas.iter().any(|a| &a.name == area) => {
                    return Err(Error::config(format!("group '{}' references unknown area '{area}'", g.name)));
                }
                _ => {}
            }
        }
        if self.groups.iter().map(|g| u64::from(g.count)).sum::<u64>() == 0 {
            return Err(Error::config("scenario has no UEs"));
        }

        self.radio.validate()?;
        self.measurement.validate()?;
        self.handover.validate(sim.dt_ms)?;
        self.rach.validate(sim.dt_ms)?;
        self.rlf.validate()
    }

    pub fn ue_count(&self) -> usize {
        self.groups.iter().map(|g| g.count as usize).sum()
    }

    pub fn cell_count(&self) -> usize {
        self.sites.iter().map(|s| s.sectors).sum()
    }
}

/// A built scenario: static network plus the moving UE population.
#[derive(Debug, Clone)]
pub struct World {
    pub radio: RadioModel,
    pub streets: Option<StreetNetwork>,
    pub areas: Vec<Polygon>,
    pub area_names: Vec<String>,
    pub ues: Vec<UeMobility>,
    pub seed: u64,
    pub dt_ms: u32,
    step: Step,
}

/// Build the world for the scenario's own seed.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<World> {
    build_scenario_seeded(cfg, cfg.simulation.seed)
}

pub fn build_scenario_seeded(cfg: &ScenarioConfig, seed: u64) -> Result<World> {
    cfg.validate()?;
    let (buildings, streets, areas) = cfg.layout();

    let mut cells = Vec::new();
    let mut sites = Vec::new();
    for (s, sc) in cfg.sites.iter().enumerate() {
        let first = cells.len();
        for az in sc.azimuths() {
            cells.push(Cell {
                id: CellId(cells.len() as u16),
                site: s,
                position: sc.position,
                height_m: sc.height_m,
                boresight_deg: az,
            });
        }
        sites.push(Site {
            position: sc.position,
            height_m: sc.height_m,
            cells: first..cells.len(),
        });
    }
    let radio = RadioModel {
        cfg: cfg.radio.clone(),
        cells,
        sites,
        buildings,
        rx_height_m: cfg.simulation.rx_height_m,
        dt_ms: f64::from(cfg.simulation.dt_ms),
    };

    let network = if cfg.groups.iter().any(|g| g.domain == Domain::Streets) {
        let lines: Vec<Polyline> = streets.into_iter().map(|s| s.points).collect();
        Some(StreetNetwork::build(&lines)?)
    } else {
        None
    };
    let area_names: Vec<String> = areas.iter().map(|a| a.name.clone()).collect();
    let polygons: Vec<Polygon> = areas.into_iter().map(|a| a.polygon).collect();

    let mut placement = rng_stream(seed, streams::PLACEMENT);
    let mut ues = Vec::with_capacity(cfg.ue_count());
    for (gi, g) in cfg.groups.iter().enumerate() {
        let domain = match &g.domain {
            Domain::Streets => MoveDomain::Streets,
            Domain::Area { area } => MoveDomain::Area(
                area_names
                    .iter()
                    .position(|n| n == area)
                    .expect("validated area reference"),
            ),
        };
        for _ in 0..g.count {
            let ue = ues.len() as u32;
            ues.push(UeMobility::place(
                gi,
                domain,
                g.speed_kmh,
                cfg.simulation.dt_ms,
                network.as_ref(),
                &polygons,
                &mut placement,
                rng_stream(seed, streams::for_ue(streams::MOBILITY, ue)),
            ));
        }
    }

    Ok(World {
        radio,
        streets: network,
        areas: polygons,
        area_names,
        ues,
        seed,
        dt_ms: cfg.simulation.dt_ms,
        step: 0,
    })
}

impl World {
    pub fn num_cells(&self) -> usize {
        self.radio.cells.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    /// Index of the last step whose positions are current.
    pub fn step(&self) -> Step {
        self.step
    }

    /// Move every UE by one time step to reach step `n`; returns the
    /// straight-line displacement of each UE.
    pub fn step_positions(&mut self, n: Step) -> Vec<f64> {
        assert_eq!(n, self.step + 1, "steps must advance one at a time");
        self.step = n;
        let streets = self.streets.as_ref();
        let areas = &self.areas;
        self.ues.iter_mut().map(|u| u.advance(streets, areas)).collect()
    }

    /// True if `ue` lies within its group's movement domain.
    pub fn in_domain(&self, ue: usize) -> bool {
        let u = &self.ues[ue];
        match u.domain {
            MoveDomain::Streets => self.streets.as_ref().is_some_and(|s| s.contains(u.position)),
            MoveDomain::Area(a) => self.areas[a].contains(u.position),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ScenarioConfig {
        ScenarioConfig {
            name: "minimal".into(),
            grid: None,
            streets: vec![StreetConfig {
                name: "main".into(),
                points: Polyline::new(vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0)]),
            }],
            sites: vec![SiteConfig {
                id: None,
                position: Point::new(50.0, 10.0),
                height_m: 10.0,
                sectors: 1,
                azimuths_deg: None,
                first_azimuth_deg: -90.0,
            }],
            groups: vec![UserGroup {
                name: "one".into(),
                count: 1,
                speed_kmh: 30.0,
                domain: Domain::Streets,
            }],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn default_layout_has_33_cells_and_320_ues() {
        let w = build_scenario(&ScenarioConfig::default()).unwrap();
        assert_eq!(w.num_cells(), 33);
        assert_eq!(w.num_ues(), 320);
        assert!((0..w.num_ues()).all(|u| w.in_domain(u)));
    }

    #[test]
    fn minimal_world() {
        let w = build_scenario(&minimal()).unwrap();
        assert_eq!(w.num_cells(), 1);
        assert_eq!(w.num_ues(), 1);
    }

    #[test]
    fn placement_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = build_scenario(&cfg).unwrap();
        let b = build_scenario(&cfg).unwrap();
        let pa: Vec<Point> = a.ues.iter().map(|u| u.position).collect();
        let pb: Vec<Point> = b.ues.iter().map(|u| u.position).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn default_sites_are_outside_buildings() {
        let cfg = ScenarioConfig::default();
        let (buildings, _, _) = cfg.layout();
        for s in &cfg.sites {
            assert!(buildings
                .iter()
                .all(|b| !(s.position.x > b.x0 && s.position.x < b.x1 && s.position.y > b.y0 && s.position.y < b.y1)));
        }
    }

    #[test]
    fn step_displacements() {
        let mut w = build_scenario(&minimal()).unwrap();
        let d = w.step_positions(1);
        assert!((d[0] - 0.083_333_333_333).abs() < 1e-9);
        let mut cfg = minimal();
        cfg.groups[0].speed_kmh = 3.0;
        let mut w = build_scenario(&cfg).unwrap();
        assert!((w.step_positions(1)[0] - 0.008_333_333_333).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut cfg = minimal();
        cfg.sites.clear();
        assert!(build_scenario(&cfg).unwrap_err().is_config_error());

        let mut cfg = minimal();
        cfg.groups[0].count = 0;
        assert!(build_scenario(&cfg).is_err());

        let mut cfg = minimal();
        cfg.sites.push(cfg.sites[0].clone());
        cfg.sites[0].id = Some("a".into());
        cfg.sites[1].id = Some("a".into());
        assert!(build_scenario(&cfg).is_err());

        let mut cfg = minimal();
        cfg.simulation.dt_ms = 0;
        assert!(build_scenario(&cfg).is_err());

        let mut cfg = minimal();
        cfg.groups[0].domain = Domain::Area { area: "nowhere".into() };
        assert!(build_scenario(&cfg).is_err());

        let mut cfg = minimal();
        cfg.areas.push(AreaConfig {
            name: "flat".into(),
            polygon: Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]),
        });
        assert!(build_scenario(&cfg).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        let bad = text.replace("schema_version = 1", "schema_version = 7");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }
}
