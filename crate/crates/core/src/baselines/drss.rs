use crate::doa::AnchorLayout;
use crate::radio::PathLossModel;
use crate::{Error, Point2, Result};

use super::{argmin, GridSpec};

/// Theoretical differential RSS (`RSS_i - RSS_ref`) at every grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DrssTemplate {
    grid: GridSpec,
    reference_anchor: usize,
    anchors: usize,
    // cell-major: values[cell * anchors + i]
    values: Vec<f64>,
}

impl DrssTemplate {
    pub fn build(
        layout: &AnchorLayout,
        model: &PathLossModel,
        grid: GridSpec,
        reference_anchor: usize,
    ) -> Result<Self> {
        let n = layout.len();
        if reference_anchor >= n {
            return Err(Error::InvalidConfig(format!("reference anchor {reference_anchor} out of range")));
        }
        let mut values = Vec::with_capacity(grid.cell_count() * n);
        for c in grid.centers() {
            let rss = layout.predicted_rssi(model, c);
            let r = rss[reference_anchor];
            values.extend(rss.iter().map(|s| s - r));
        }
        Ok(Self { grid, reference_anchor, anchors: n, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn reference_anchor(&self) -> usize {
        self.reference_anchor
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors
    }

    /// Template row for one cell.
    pub fn cell(&self, index: usize) -> &[f64] {
        &self.values[index * self.anchors..(index + 1) * self.anchors]
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Offline phase with the first anchor as reference.
pub fn drss_offline(layout: &AnchorLayout, model: &PathLossModel, grid: GridSpec) -> Result<DrssTemplate> {
    DrssTemplate::build(layout, model, grid, 0)
}

/// Online phase: the cell centre whose theoretical DRSS is closest in least
/// squares to the measured DRSS, taken relative to the template's reference
/// anchor. Ties go to the first cell in row-major order.
pub fn drss_locate(template: &DrssTemplate, measured_rssi: &[f64]) -> Result<Point2> {
    if template.is_empty() {
        return Err(Error::Empty("DRSS template"));
    }
    if measured_rssi.len() != template.anchors {
        return Err(Error::AnchorCountMismatch { expected: template.anchors, got: measured_rssi.len() });
    }
    let r = measured_rssi[template.reference_anchor];
    let measured: Vec<f64> = measured_rssi.iter().map(|s| s - r).collect();
    let costs = template
        .values
        .chunks_exact(template.anchors)
        .map(|row| row.iter().zip(&measured).map(|(t, m)| (t - m) * (t - m)).sum::<f64>());
    let best = argmin(costs).ok_or(Error::Empty("DRSS template"))?;
    Ok(template.grid.center(best))
}

/// Pre-built templates for every reference choice; each query uses the
/// anchor with the strongest measured signal as reference.
#[derive(Debug, Clone)]
pub struct DrssLocator {
    templates: Vec<DrssTemplate>,
}

impl DrssLocator {
    pub fn new(layout: &AnchorLayout, model: &PathLossModel, grid: GridSpec) -> Result<Self> {
        let templates =
            (0..layout.len()).map(|r| DrssTemplate::build(layout, model, grid, r)).collect::<Result<_>>()?;
        Ok(Self { templates })
    }

    pub fn locate(&self, measured_rssi: &[f64]) -> Result<Point2> {
        let strongest = measured_rssi
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
            .map(|(i, _)| i)
            .ok_or(Error::Empty("measured RSSI"))?;
        let template = self
            .templates
            .get(strongest)
            .ok_or(Error::AnchorCountMismatch { expected: self.templates.len(), got: measured_rssi.len() })?;
        drss_locate(template, measured_rssi)
    }
}
