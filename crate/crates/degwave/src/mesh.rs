//! Graded 1-D meshes clustering at the degenerate endpoint x = 0, and
//! composite meshes for the transmission problem on (0,1) u (1,L).

use crate::error::{Error, Result};
use std::io::Write;

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<f64>,
    interface_index: Option<usize>,
    domain_right: f64,
}

impl Mesh {
    /// Nodes x_i = (i/n)^grading on [0,1]; grading = 1 is uniform.
    pub fn build_graded(n: usize, grading: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Configuration(format!("mesh needs n >= 2 cells, got {n}")));
        }
        if !(1.0..=4.0).contains(&grading) {
            return Err(Error::Configuration(format!("grading must lie in [1,4], got {grading}")));
        }
        let nodes = (0..=n).map(|i| (i as f64 / n as f64).powf(grading)).collect();
        Ok(Self { nodes, interface_index: None, domain_right: 1.0 })
    }

    /// Graded nodes on [0,1] joined with uniform nodes on [1,L]; the node at
    /// 1 is shared and recorded as the interface.
    pub fn build_composite(n_left: usize, grading: f64, n_right: usize, l: f64) -> Result<Self> {
        if l <= 1.0 {
            return Err(Error::Configuration(format!("transmission domain needs L > 1, got {l}")));
        }
        if n_right < 1 {
            return Err(Error::Configuration("composite mesh needs n_right >= 1".into()));
        }
        let left = Self::build_graded(n_left, grading)?;
        let mut nodes = left.nodes;
        for i in 1..=n_right {
            nodes.push(1.0 + (l - 1.0) * i as f64 / n_right as f64);
        }
        *nodes.last_mut().unwrap() = l;
        Ok(Self { nodes, interface_index: Some(n_left), domain_right: l })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    /// Trapezoid weight of node i: half the span of the adjacent cells.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let left = if i == 0 { 0.0 } else { self.nodes[i] - self.nodes[i - 1] };
        let right = if i + 1 == self.nodes.len() { 0.0 } else { self.nodes[i + 1] - self.nodes[i] };
        0.5 * (left + right)
    }

    pub fn interface_index(&self) -> Option<usize> {
        self.interface_index
    }

    pub fn domain_right(&self) -> f64 {
        self.domain_right
    }

    pub fn mesh_ratio(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for i in 0..self.cell_count() {
            let w = self.cell_width(i);
            min = min.min(w);
            max = max.max(w);
        }
        max / min
    }

    /// One-column CSV of the node coordinates.
    pub fn dump_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x")?;
        for x in &self.nodes {
            writeln!(out, "{x:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_mesh() {
        let m = Mesh::build_graded(4, 1.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn quadratic_grading() {
        let m = Mesh::build_graded(4, 2.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.0625, 0.25, 0.5625, 1.0]);
    }

    #[test]
    fn graded_cell_extremes() {
        let m = Mesh::build_graded(100, 2.0).unwrap();
        assert_relative_eq!(m.cell_width(0), 1e-4, max_relative = 1e-12);
        assert_relative_eq!(m.cell_width(99), 1.0 - 0.99f64.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Mesh::build_graded(1, 1.0).is_err());
        assert!(Mesh::build_graded(32, 0.5).is_err());
        assert!(Mesh::build_graded(32, 5.0).is_err());
        assert!(Mesh::build_composite(16, 1.0, 8, 0.9).is_err());
    }

    #[test]
    fn composite_mesh_layout() {
        let m = Mesh::build_composite(4, 1.0, 2, 2.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]);
        assert_eq!(m.interface_index(), Some(4));
        assert_eq!(m.domain_right(), 2.0);
        assert_eq!(m.len(), 4 + 2 + 1);
    }

    #[test]
    fn composite_has_exactly_one_interface_node() {
        let m = Mesh::build_composite(16, 2.0, 8, 2.0).unwrap();
        let ones = m.nodes().iter().filter(|&&x| x == 1.0).count();
        assert_eq!(ones, 1);
        assert_eq!(m.node(m.interface_index().unwrap()), 1.0);
    }

    #[test]
    fn right_spacing_uniform() {
        let m = Mesh::build_composite(16, 1.0, 4, 2.0).unwrap();
        let iface = m.interface_index().unwrap();
        for i in iface..m.cell_count() {
            assert_relative_eq!(m.cell_width(i), 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn mesh_ratio_tracks_grading() {
        for &(n, g) in &[(64usize, 2.0f64), (128, 3.0), (256, 1.5)] {
            let m = Mesh::build_graded(n, g).unwrap();
            let predicted = g * (n as f64).powf(g - 1.0);
            let ratio = m.mesh_ratio();
            assert!(ratio < 2.0 * predicted && ratio > predicted / 2.0,
                "n = {n}, g = {g}: ratio {ratio} vs predicted {predicted}");
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let m = Mesh::build_composite(32, 2.0, 16, 2.0).unwrap();
        let total: f64 = (0..m.len()).map(|i| m.trapezoid_weight(i)).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-12);
    }
}
