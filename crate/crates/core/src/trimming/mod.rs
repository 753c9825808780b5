//! Trim regions, cut-cell quadrature, cell classification and neighbors.

mod curve;
mod cutcell;
mod mesh;
mod region;

pub use curve::{split_at_lines, CurvePiece, TrimCurve};
pub use cutcell::cut_cell_quadrature;
pub use mesh::{
    classify_cells, select_good_neighbor, CellData, CellLabel, Side, TrimFrame, TrimmedMesh,
    EMPTY_RATIO,
};
pub use region::{ParamRegion, TrimRegion};
