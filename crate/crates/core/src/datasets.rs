//! Canonical long-format CSV and scenario descriptors.
//!
//! Every dataset is first converted to one record per
//! `(point, anchor, channel)` reading with the header
//! `point_id,x,y,anchor_id,rssi,channel,technology`. A TOML scenario
//! descriptor declares the workspace, the anchor positions and which slice of
//! the file to load.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::doa::{Anchor, AnchorLayout, LayoutKind, RssiSnapshot};
use crate::radio::{PathLossModel, MIN_DISTANCE_M};
use crate::sim::Workspace;
use crate::{Error, Point2, Rect, Result};

pub const CANONICAL_HEADER: [&str; 7] = ["point_id", "x", "y", "anchor_id", "rssi", "channel", "technology"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technology {
    Wifi,
    Ble,
    Zigbee,
    Simulated,
}

impl Technology {
    pub fn name(self) -> &'static str {
        match self {
            Technology::Wifi => "wifi",
            Technology::Ble => "ble",
            Technology::Zigbee => "zigbee",
            Technology::Simulated => "simulated",
        }
    }

    fn matches(self, label: &str) -> bool {
        let l = label.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        l == self.name()
    }
}

impl std::str::FromStr for Technology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Technology::Wifi, Technology::Ble, Technology::Zigbee, Technology::Simulated]
            .into_iter()
            .find(|t| t.matches(s))
            .ok_or_else(|| Error::Schema(format!("unknown technology `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Diagonal,
    Inside,
    Boundary,
}

/// How test points are ordered into a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOrdering {
    /// Greedy nearest-neighbour chain starting from the first point in the
    /// file.
    #[default]
    NearestNeighbor,
    /// Ascending `point_id` (replay of recorded or simulated streams).
    PointId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub point_id: u64,
    pub x: f64,
    pub y: f64,
    pub anchor_id: String,
    pub rssi: f64,
    pub channel: Option<u8>,
    pub technology: String,
}

pub fn read_canonical(path: &Path) -> Result<Vec<CanonicalRecord>> {
    let file = std::fs::File::open(path)?;
    read_canonical_from(file)
}

pub fn read_canonical_from<R: std::io::Read>(reader: R) -> Result<Vec<CanonicalRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CANONICAL_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "expected header `{}`, found `{}`",
            CANONICAL_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.deserialize::<CanonicalRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(format!("record {}: {e}", line + 1)))?;
        if !(rec.x.is_finite() && rec.y.is_finite() && rec.rssi.is_finite()) {
            return Err(Error::Schema(format!("record {}: non-finite value", line + 1)));
        }
        if rec.channel.is_some_and(|c| c > 39) {
            return Err(Error::Schema(format!("record {}: channel must be in 0..=39", line + 1)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_canonical(path: &Path, records: &[CanonicalRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_canonical_to(file, records)
}

pub fn write_canonical_to<W: std::io::Write>(writer: W, records: &[CanonicalRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(CANONICAL_HEADER)?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Flattens a snapshot stream into canonical records, using the timestamp
/// index as point id.
pub fn snapshots_to_records(
    snapshots: &[RssiSnapshot],
    layout: &AnchorLayout,
    technology: Technology,
) -> Result<Vec<CanonicalRecord>> {
    let mut out = Vec::with_capacity(snapshots.len() * layout.len());
    for s in snapshots {
        s.validate(layout)?;
        let p = s.true_position.ok_or(Error::Schema("canonical records require ground truth".into()))?;
        for (a, rssi) in layout.anchors().iter().zip(&s.rssi_by_anchor) {
            out.push(CanonicalRecord {
                point_id: s.timestamp_index as u64,
                x: p.x,
                y: p.y,
                anchor_id: a.id.clone(),
                rssi: *rssi,
                channel: None,
                technology: technology.name().to_string(),
            });
        }
    }
    Ok(out)
}

/// Scenario descriptor: workspace, anchors and which slice of the data to
/// load.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDescriptor {
    pub name: String,
    pub workspace: Workspace,
    pub technology: Technology,
    pub channel: Option<u8>,
    pub region: Option<Region>,
    pub ordering: PointOrdering,
    /// Propagation model assumed by the model-based estimators. `None` means
    /// fit it from the data.
    pub model: Option<PathLossModel>,
    /// Canonical CSV, resolved relative to the descriptor file.
    pub data: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DescriptorFile {
    name: String,
    technology: Technology,
    width: f64,
    height: f64,
    #[serde(default)]
    origin: Option<[f64; 2]>,
    layout: LayoutKind,
    anchors: Vec<AnchorEntry>,
    #[serde(default)]
    channel: Option<u8>,
    #[serde(default)]
    region: Option<Region>,
    #[serde(default)]
    ordering: PointOrdering,
    #[serde(default)]
    model: Option<PathLossModel>,
    #[serde(default)]
    data: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AnchorEntry {
    id: String,
    x: f64,
    y: f64,
}

impl ScenarioDescriptor {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: DescriptorFile = toml::from_str(text)?;
        let [ox, oy] = raw.origin.unwrap_or([0.0, 0.0]);
        let bounds = Rect::new(Point2::new(ox, oy), Point2::new(ox + raw.width, oy + raw.height))?;
        let anchors: Vec<Anchor> = raw.anchors.into_iter().map(|a| Anchor::new(a.id, Point2::new(a.x, a.y))).collect();
        let mut seen = HashSet::new();
        if let Some(dup) = anchors.iter().find(|a| !seen.insert(a.id.clone())) {
            return Err(Error::InvalidLayout(format!("duplicate anchor id `{}`", dup.id)));
        }
        let layout = match raw.layout {
            LayoutKind::FourCorner => AnchorLayout::four_corner(anchors)?,
            LayoutKind::General => AnchorLayout::general(anchors)?,
        };
        if let Some(c) = raw.channel {
            if c > 39 {
                return Err(Error::InvalidConfig(format!("channel must be in 0..=39, got {c}")));
            }
        }
        Ok(Self {
            name: raw.name,
            workspace: Workspace::with_layout(bounds, layout),
            technology: raw.technology,
            channel: raw.channel,
            region: raw.region,
            ordering: raw.ordering,
            model: raw.model,
            data: raw.data,
        })
    }

    /// Reads a descriptor; a relative `data` path is resolved against the
    /// descriptor's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut d = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let Some(data) = &d.data {
            if data.is_relative() {
                d.data = Some(path.parent().unwrap_or(Path::new(".")).join(data));
            }
        }
        Ok(d)
    }

    pub fn to_toml_string(&self) -> String {
        let b = self.workspace.bounds();
        let raw = DescriptorFile {
            name: self.name.clone(),
            technology: self.technology,
            width: b.width(),
            height: b.height(),
            origin: (b.min != Point2::ZERO).then_some([b.min.x, b.min.y]),
            layout: self.workspace.layout().kind(),
            anchors: self
                .workspace
                .layout()
                .anchors()
                .iter()
                .map(|a| AnchorEntry { id: a.id.clone(), x: a.position.x, y: a.position.y })
                .collect(),
            channel: self.channel,
            region: self.region,
            ordering: self.ordering,
            model: self.model,
            data: self.data.clone(),
        };
        toml::to_string(&raw).expect("descriptor serializes")
    }

    pub fn layout(&self) -> &AnchorLayout {
        self.workspace.layout()
    }

    pub fn bounds(&self) -> Rect {
        self.workspace.bounds()
    }
}

/// A reading filled in with the anchor's median because the point had none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImputedReading {
    pub point_id: u64,
    pub anchor_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub snapshots: Vec<RssiSnapshot>,
    pub imputed: Vec<ImputedReading>,
}

/// Loads the canonical CSV at `path` into one snapshot per test point.
///
/// Records are filtered to the descriptor's technology and channel; with no
/// channel filter, readings of one point and anchor are averaged across
/// channels. Missing readings are imputed with the anchor's median and
/// reported.
pub fn load_scenario(path: &Path, descriptor: &ScenarioDescriptor) -> Result<LoadedScenario> {
    let records = read_canonical(path)?;
    scenario_from_records(&records, descriptor)
}

pub fn scenario_from_records(records: &[CanonicalRecord], descriptor: &ScenarioDescriptor) -> Result<LoadedScenario> {
    let layout = descriptor.layout();
    let bounds = descriptor.bounds();

    // (point order of first appearance) -> position, per-anchor readings
    let mut order: Vec<u64> = Vec::new();
    let mut positions: HashMap<u64, Point2> = HashMap::new();
    let mut readings: HashMap<(u64, usize), Vec<f64>> = HashMap::new();
    let mut keys = HashSet::new();
    for r in records {
        let anchor = layout.index_of(&r.anchor_id).ok_or_else(|| Error::UnknownAnchor(r.anchor_id.clone()))?;
        if !descriptor.technology.matches(&r.technology) {
            continue;
        }
        if descriptor.channel.is_some() && r.channel != descriptor.channel {
            continue;
        }
        if !keys.insert((r.point_id, anchor, r.channel)) {
            return Err(Error::Schema(format!(
                "duplicate reading for point {} anchor `{}` channel {:?}",
                r.point_id, r.anchor_id, r.channel
            )));
        }
        let p = Point2::new(r.x, r.y);
        if !bounds.contains_with_slack(p, 1e-9) {
            return Err(Error::Schema(format!(
                "point {} at ({}, {}) lies outside the workspace",
                r.point_id, r.x, r.y
            )));
        }
        match positions.get(&r.point_id) {
            Some(prev) if *prev != p => {
                return Err(Error::Schema(format!("point {} has inconsistent coordinates", r.point_id)));
            }
            Some(_) => {}
            None => {
                positions.insert(r.point_id, p);
                order.push(r.point_id);
            }
        }
        readings.entry((r.point_id, anchor)).or_default().push(r.rssi);
    }
    if order.is_empty() {
        return Err(Error::Empty("scenario has no matching records"));
    }

    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let medians: Vec<Option<f64>> = (0..layout.len())
        .map(|a| {
            let mut vals: Vec<f64> = order.iter().filter_map(|p| readings.get(&(*p, a)).map(mean)).collect();
            median(&mut vals)
        })
        .collect();

    let sequence = match descriptor.ordering {
        PointOrdering::PointId => {
            let mut ids = order.clone();
            ids.sort_unstable();
            ids
        }
        PointOrdering::NearestNeighbor => {
            let pts: Vec<Point2> = order.iter().map(|id| positions[id]).collect();
            nearest_neighbor_chain(&pts).into_iter().map(|i| order[i]).collect()
        }
    };

    let mut imputed = Vec::new();
    let mut snapshots = Vec::with_capacity(sequence.len());
    for (t, id) in sequence.iter().enumerate() {
        let mut rssi = Vec::with_capacity(layout.len());
        for (a, anchor) in layout.anchors().iter().enumerate() {
            match readings.get(&(*id, a)) {
                Some(v) => rssi.push(mean(v)),
                None => {
                    let m = medians[a].ok_or_else(|| {
                        Error::Schema(format!("anchor `{}` has no readings in this scenario", anchor.id))
                    })?;
                    imputed.push(ImputedReading { point_id: *id, anchor_id: anchor.id.clone() });
                    rssi.push(m);
                }
            }
        }
        snapshots.push(RssiSnapshot::new(t, rssi, Some(positions[id])));
    }
    Ok(LoadedScenario { snapshots, imputed })
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Visit order of a greedy nearest-neighbour walk from index 0; ties go to
/// the lower index.
pub fn nearest_neighbor_chain(points: &[Point2]) -> Vec<usize> {
    let n = points.len();
    let mut visited = vec![false; n];
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut current = 0;
    visited[0] = true;
    out.push(0);
    for _ in 1..n {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if visited[i] {
                continue;
            }
            let d = p.distance(points[current]);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (next, _) = best.expect("unvisited point remains");
        visited[next] = true;
        out.push(next);
        current = next;
    }
    out
}

/// Least-squares fit of `rssi = A - 10·n·log10(d)` over every
/// (anchor distance, reading) pair; the noise std is the residual standard
/// deviation.
pub fn calibrate_model(snapshots: &[RssiSnapshot], layout: &AnchorLayout) -> Result<PathLossModel> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in snapshots {
        s.validate(layout)?;
        let Some(p) = s.true_position else { continue };
        for (a, rssi) in layout.positions().zip(&s.rssi_by_anchor) {
            xs.push(p.distance(a).max(MIN_DISTANCE_M).log10());
            ys.push(*rssi);
        }
    }
    if xs.len() < 2 {
        return Err(Error::Empty("calibration needs at least two readings with ground truth"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * n {
        return Err(Error::RankDeficient);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let noise = if xs.len() > 2 { (ssr / dof).sqrt() } else { 0.0 };
    PathLossModel::new(intercept, -slope / 10.0, noise)
}

/// Parses wide-format CSV (one row per point, one RSSI column per anchor)
/// into canonical records.
pub fn wide_to_canonical<R: std::io::Read>(
    reader: R,
    columns: &WideColumns,
    technology: Technology,
) -> Result<Vec<CanonicalRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema(format!("column `{name}` not found")))
    };
    let x_col = find(&columns.x)?;
    let y_col = find(&columns.y)?;
    let id_col = columns.point_id.as_deref().map(find).transpose()?;
    let ch_col = columns.channel.as_deref().map(find).transpose()?;
    let anchor_cols: Vec<(String, usize)> =
        columns.anchors.iter().map(|a| Ok((a.clone(), find(a)?))).collect::<Result<_>>()?;

    let parse = |rec: &csv::StringRecord, col: usize, row: usize| -> Result<Option<f64>> {
        let field = rec.get(col).unwrap_or("").trim();
        if field.is_empty() || field.eq_ignore_ascii_case("nan") {
            return Ok(None);
        }
        field.parse::<f64>().map(Some).map_err(|_| Error::Schema(format!("row {row}: `{field}` is not a number")))
    };

    let mut ids: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let x = parse(&rec, x_col, row + 1)?.ok_or_else(|| Error::Schema(format!("row {}: missing x", row + 1)))?;
        let y = parse(&rec, y_col, row + 1)?.ok_or_else(|| Error::Schema(format!("row {}: missing y", row + 1)))?;
        let point_id = match id_col {
            Some(c) => parse(&rec, c, row + 1)?.map(|v| v as u64).unwrap_or(row as u64),
            None => {
                // identical coordinates share a point id
                let key = (x.to_bits(), y.to_bits());
                let next = ids.len() as u64;
                *ids.entry(key).or_insert(next)
            }
        };
        let channel = match ch_col {
            Some(c) => parse(&rec, c, row + 1)?.map(|v| v as u8),
            None => None,
        };
        for (anchor, col) in &anchor_cols {
            if let Some(rssi) = parse(&rec, *col, row + 1)? {
                out.push(CanonicalRecord {
                    point_id,
                    x,
                    y,
                    anchor_id: anchor.clone(),
                    rssi,
                    channel,
                    technology: technology.name().to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Column names of a wide-format file.
#[derive(Debug, Clone, PartialEq)]
pub struct WideColumns {
    pub x: String,
    pub y: String,
    pub anchors: Vec<String>,
    pub point_id: Option<String>,
    pub channel: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_trajectory, simulate_stream, TrajectoryKind};
    use approx::assert_relative_eq;

    fn triangle_descriptor() -> ScenarioDescriptor {
        ScenarioDescriptor::from_toml_str(
            r#"
name = "triangle"
technology = "wifi"
width = 6.0
height = 5.5
layout = "general"
[[anchors]]
id = "A"
x = 1.0
y = 1.0
[[anchors]]
id = "B"
x = 5.0
y = 1.0
[[anchors]]
id = "C"
x = 3.0
y = 4.4641
"#,
        )
        .unwrap()
    }

    fn grid_records(d: &ScenarioDescriptor, model: &PathLossModel) -> Vec<CanonicalRecord> {
        let mut recs = Vec::new();
        let mut id = 0;
        for i in 0..7 {
            for j in 0..7 {
                let p = Point2::new(1.5 + 0.5 * i as f64, 1.25 + 0.5 * j as f64);
                for a in d.layout().anchors() {
                    recs.push(CanonicalRecord {
                        point_id: id,
                        x: p.x,
                        y: p.y,
                        anchor_id: a.id.clone(),
                        rssi: model.predict_rssi(p.distance(a.position)).unwrap(),
                        channel: None,
                        technology: "wifi".into(),
                    });
                }
                id += 1;
            }
        }
        recs
    }

    #[test]
    fn forty_nine_points_three_anchors() {
        let d = triangle_descriptor();
        let recs = grid_records(&d, &PathLossModel::default());
        let loaded = scenario_from_records(&recs, &d).unwrap();
        assert_eq!(loaded.snapshots.len(), 49);
        assert!(loaded.snapshots.iter().all(|s| s.rssi_by_anchor.len() == 3));
        assert!(loaded.imputed.is_empty());
        // chain visits every point once
        let mut seen: Vec<(i64, i64)> = loaded
            .snapshots
            .iter()
            .map(|s| {
                let p = s.true_position.unwrap();
                ((p.x * 100.0) as i64, (p.y * 100.0) as i64)
            })
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 49);
        // consecutive chain steps are grid neighbours wherever possible
        let first = loaded.snapshots[0].true_position.unwrap();
        assert_eq!(first, Point2::new(1.5, 1.25));
    }

    #[test]
    fn missing_reading_is_imputed_with_median() {
        let d = triangle_descriptor();
        let mut recs = grid_records(&d, &PathLossModel::default());
        let victim = recs.iter().position(|r| r.point_id == 10 && r.anchor_id == "B").unwrap();
        recs.remove(victim);
        let loaded = scenario_from_records(&recs, &d).unwrap();
        assert_eq!(loaded.imputed, vec![ImputedReading { point_id: 10, anchor_id: "B".into() }]);
        let mut b: Vec<f64> = recs.iter().filter(|r| r.anchor_id == "B").map(|r| r.rssi).collect();
        let m = median(&mut b).unwrap();
        let p = recs.iter().find(|r| r.point_id == 10).map(|r| Point2::new(r.x, r.y)).unwrap();
        let snap = loaded.snapshots.iter().find(|s| s.true_position == Some(p)).unwrap();
        assert_eq!(snap.rssi_by_anchor[1], m);
    }

    #[test]
    fn loader_errors() {
        let d = triangle_descriptor();
        let mut recs = grid_records(&d, &PathLossModel::default());
        recs[0].anchor_id = "Z".into();
        assert!(matches!(scenario_from_records(&recs, &d), Err(Error::UnknownAnchor(a)) if a == "Z"));
        assert!(matches!(scenario_from_records(&[], &d), Err(Error::Empty(_))));
        let bad = "point,x,y\n1,2,3\n";
        assert!(matches!(read_canonical_from(bad.as_bytes()), Err(Error::Schema(_))));
        let mut recs = grid_records(&d, &PathLossModel::default());
        recs[0].x = 9.0;
        assert!(scenario_from_records(&recs, &d).is_err());
    }

    #[test]
    fn channels_filter_or_average() {
        let mut d = triangle_descriptor();
        let base = grid_records(&d, &PathLossModel::default());
        let mut recs = Vec::new();
        for (ch, off) in [(0u8, -1.0), (39u8, 3.0)] {
            recs.extend(base.iter().cloned().map(|mut r| {
                r.channel = Some(ch);
                r.rssi += off;
                r
            }));
        }
        let combined = scenario_from_records(&recs, &d).unwrap();
        d.channel = Some(39);
        let only39 = scenario_from_records(&recs, &d).unwrap();
        let s0 = &combined.snapshots[0];
        let s39 = &only39.snapshots[0];
        let truth =
            PathLossModel::default().predict_rssi(s0.true_position.unwrap().distance(Point2::new(1.0, 1.0))).unwrap();
        assert_relative_eq!(s0.rssi_by_anchor[0], truth + 1.0, epsilon = 1e-12);
        assert_relative_eq!(s39.rssi_by_anchor[0], truth + 3.0, epsilon = 1e-12);
    }

    #[test]
    fn simulated_stream_round_trips_bit_exactly() {
        let ws = Workspace::default();
        let t = generate_trajectory(&ws, TrajectoryKind::Diagonal, 0.25).unwrap();
        let model = PathLossModel::new(-40.0, 3.0, 2.0).unwrap();
        let stream = simulate_stream(&ws, &t, &model, 12).unwrap();
        let recs = snapshots_to_records(&stream, ws.layout(), Technology::Simulated).unwrap();
        let mut buf = Vec::new();
        write_canonical_to(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("point_id,x,y,anchor_id,rssi,channel,technology\n"));
        let d = ScenarioDescriptor {
            name: "replay".into(),
            workspace: ws.clone(),
            technology: Technology::Simulated,
            channel: None,
            region: None,
            ordering: PointOrdering::PointId,
            model: Some(model),
            data: None,
        };
        let back = scenario_from_records(&read_canonical_from(buf.as_slice()).unwrap(), &d).unwrap();
        assert_eq!(back.snapshots, stream);
        let reparsed = ScenarioDescriptor::from_toml_str(&d.to_toml_string()).unwrap();
        assert_eq!(reparsed, d);
    }

    #[test]
    fn calibration_exact() {
        let d = triangle_descriptor();
        let model = PathLossModel::new(-40.0, 2.0, 0.0).unwrap();
        let loaded = scenario_from_records(&grid_records(&d, &model), &d).unwrap();
        let fit = calibrate_model(&loaded.snapshots, d.layout()).unwrap();
        assert_relative_eq!(fit.reference_power_dbm(), -40.0, epsilon = 1e-9);
        assert_relative_eq!(fit.path_loss_exponent(), 2.0, epsilon = 1e-9);
        assert!(fit.noise_std_dbm() < 1e-9);
    }

    #[test]
    fn calibration_rank_deficiency() {
        let anchors = vec![
            Anchor::new("a", Point2::new(0.0, 0.0)),
            Anchor::new("b", Point2::new(2.0, 0.0)),
            Anchor::new("c", Point2::new(1.0, 3f64.sqrt())),
        ];
        let layout = AnchorLayout::general(anchors).unwrap();
        // the centroid of an equilateral triangle is equidistant from all anchors
        let c = layout.centroid();
        let snaps = [RssiSnapshot::new(0, vec![-50.0, -51.0, -49.0], Some(c))];
        assert!(matches!(calibrate_model(&snaps, &layout), Err(Error::RankDeficient)));
    }

    #[test]
    fn wide_format_conversion() {
        let text = "x,y,A,B,C\n1.5,1.5,-50,-60,\n2.0,1.5,-51,-59,-70\n";
        let cols = WideColumns {
            x: "x".into(),
            y: "y".into(),
            anchors: vec!["A".into(), "B".into(), "C".into()],
            point_id: None,
            channel: None,
        };
        let recs = wide_to_canonical(text.as_bytes(), &cols, Technology::Ble).unwrap();
        assert_eq!(recs.len(), 5);
        assert_eq!(recs[0].point_id, 0);
        assert_eq!(recs[4].point_id, 1);
        assert_eq!(recs[4].technology, "ble");
    }
}
