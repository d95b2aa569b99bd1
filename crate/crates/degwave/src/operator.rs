//! Assembly of the first-order generator A of U_t = A U for both systems.
//!
//! The degenerate block discretizes sigma (eta u_x)_x in flux form on the
//! nonuniform mesh, which makes the generator exactly dissipative in the
//! discrete energy inner product: with W = blockdiag(S, M) the symmetric
//! part of W A is minus the damping form, and zero when no damping acts.

use crate::coefficients::{CoefficientProfile, DampingProfile, SystemKind, WeightEvaluator};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use ndarray::prelude::*;
use std::io::Write;

/// The physics of a configuration: diffusion a, drift b and (for the
/// internal-damping system) the localized damping profile.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: CoefficientProfile,
    pub b: CoefficientProfile,
    pub damping: Option<DampingProfile>,
}

impl CoefficientSet {
    pub fn new(a: CoefficientProfile, b: CoefficientProfile, damping: Option<DampingProfile>) -> Self {
        Self { a, b, damping }
    }

    pub fn weight_evaluator(&self) -> WeightEvaluator {
        WeightEvaluator::new(self.a.clone(), self.b.clone())
    }
}

/// Discrete state (displacement, velocity) over the free nodes. For the
/// transmission system the interface value is a single shared unknown, so
/// continuity of displacement and velocity at x = 1 holds by storage.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub d: Array1<f64>,
    pub w: Array1<f64>,
}

impl StateVector {
    pub fn zeros(ndof: usize) -> Self {
        Self { d: Array1::zeros(ndof), w: Array1::zeros(ndof) }
    }

    pub fn ndof(&self) -> usize {
        self.d.len()
    }

    pub fn to_flat(&self) -> Array1<f64> {
        let n = self.ndof();
        let mut flat = Array1::zeros(2 * n);
        flat.slice_mut(s![..n]).assign(&self.d);
        flat.slice_mut(s![n..]).assign(&self.w);
        flat
    }

    pub fn from_flat(flat: &Array1<f64>) -> Self {
        let n = flat.len() / 2;
        Self {
            d: flat.slice(s![..n]).to_owned(),
            w: flat.slice(s![n..]).to_owned(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { d: &self.d * c, w: &self.w * c }
    }
}

/// Dense generator with its energy inner product data.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    system: SystemKind,
    mesh: Mesh,
    ndof: usize,
    /// Stiffness S of the gradient energy (symmetric positive definite).
    stiffness: Array2<f64>,
    /// Diagonal mass of the velocity energy (trapezoid weight / sigma).
    mass: Array1<f64>,
    /// Diagonal damping form: D(s) = sum damp_i w_i^2.
    damp: Array1<f64>,
    /// The generator itself.
    a_mat: Array2<f64>,
}

impl GeneratorMatrix {
    /// Generator of the internal-damping system on (0,1) with Dirichlet
    /// conditions at both ends.
    pub fn assemble_internal(mesh: &Mesh, coeffs: &CoefficientSet) -> Result<Self> {
        if mesh.interface_index().is_some() || mesh.domain_right() != 1.0 {
            return Err(Error::Configuration(
                "internal-damping system needs a simple mesh on [0,1]".into(),
            ));
        }
        let n = mesh.cell_count();
        let ndof = n - 1; // nodes 1..n-1
        let fields = WeightedFields::evaluate(mesh, coeffs, n)?;

        let mut stiffness = Array2::zeros((ndof, ndof));
        for cell in 0..n {
            let kappa = fields.eta_mid[cell] / mesh.cell_width(cell);
            let (i, j) = (cell as isize - 1, cell as isize); // dof indices of cell endpoints
            add_cell(&mut stiffness, i, j, kappa, ndof);
        }

        let mut mass = Array1::zeros(ndof);
        let mut damp = Array1::zeros(ndof);
        for dof in 0..ndof {
            let node = dof + 1;
            mass[dof] = mesh.trapezoid_weight(node) / fields.sigma_node[node];
            if let Some(h) = &coeffs.damping {
                damp[dof] = mass[dof] * h.eval(mesh.node(node))?;
            }
        }

        let a_mat = build_generator(&stiffness, &mass, &damp);
        Ok(Self { system: SystemKind::InternalDamping, mesh: mesh.clone(), ndof, stiffness, mass, damp, a_mat })
    }

    /// Generator of the transmission system: degenerate block on (0,1),
    /// classical wave on (1,L), flux balance at the shared interface node
    /// and (optionally) the absorbing condition y_x(L) = -z(L).
    pub fn assemble_transmission(
        mesh: &Mesh,
        coeffs: &CoefficientSet,
        l: f64,
        boundary_damping: bool,
    ) -> Result<Self> {
        let iface = mesh
            .interface_index()
            .ok_or_else(|| Error::Configuration("transmission system needs a composite mesh with an interface node".into()))?;
        if (mesh.domain_right() - l).abs() > 1e-12 {
            return Err(Error::Configuration(format!(
                "mesh right end {} does not match L = {l}",
                mesh.domain_right()
            )));
        }
        let total_cells = mesh.cell_count();
        let ndof = mesh.len() - 1; // all nodes except the Dirichlet node 0
        let fields = WeightedFields::evaluate(mesh, coeffs, iface)?;

        let mut stiffness = Array2::zeros((ndof, ndof));
        for cell in 0..total_cells {
            let coeff = if cell < iface { fields.eta_mid[cell] } else { 1.0 };
            let kappa = coeff / mesh.cell_width(cell);
            let (i, j) = (cell as isize - 1, cell as isize);
            add_cell(&mut stiffness, i, j, kappa, ndof);
        }

        let mut mass = Array1::zeros(ndof);
        for dof in 0..ndof {
            let node = dof + 1;
            mass[dof] = if node < iface {
                mesh.trapezoid_weight(node) / fields.sigma_node[node]
            } else if node == iface {
                // both sides contribute to the shared interface unknown
                0.5 * mesh.cell_width(iface - 1) / fields.sigma_node[iface]
                    + 0.5 * mesh.cell_width(iface)
            } else {
                mesh.trapezoid_weight(node)
            };
        }

        let mut damp = Array1::zeros(ndof);
        if boundary_damping {
            damp[ndof - 1] = 1.0; // the |z(L)|^2 dissipation channel
        }

        let a_mat = build_generator(&stiffness, &mass, &damp);
        Ok(Self { system: SystemKind::Transmission, mesh: mesh.clone(), ndof, stiffness, mass, damp, a_mat })
    }

    pub fn system(&self) -> SystemKind {
        self.system
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn dim(&self) -> usize {
        2 * self.ndof
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a_mat
    }

    pub fn mass(&self) -> &Array1<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &Array2<f64> {
        &self.stiffness
    }

    pub fn damping_form(&self) -> &Array1<f64> {
        &self.damp
    }

    /// Mesh node index carried by dof i.
    pub fn dof_node(&self, dof: usize) -> usize {
        dof + 1
    }

    /// Dense energy weight W = blockdiag(S, M).
    pub fn energy_weight(&self) -> Array2<f64> {
        let n = self.ndof;
        let mut w = Array2::zeros((2 * n, 2 * n));
        w.slice_mut(s![..n, ..n]).assign(&self.stiffness);
        for i in 0..n {
            w[[n + i, n + i]] = self.mass[i];
        }
        w
    }

    /// E = 1/2 (d' S d + sum m_i w_i^2), the trapezoid discretization of the
    /// continuous energy.
    pub fn discrete_energy(&self, s: &StateVector) -> Result<f64> {
        if s.ndof() != self.ndof {
            return Err(Error::Contract(format!(
                "state dimension {} does not match generator dofs {}",
                s.ndof(),
                self.ndof
            )));
        }
        let grad = s.d.dot(&self.stiffness.dot(&s.d));
        let kin: f64 = self.mass.iter().zip(s.w.iter()).map(|(m, w)| m * w * w).sum();
        Ok(0.5 * (grad + kin))
    }

    /// Instantaneous dissipation D(s): the internal damping integral or
    /// |z(L)|^2, by the same quadrature as the energy.
    pub fn dissipation(&self, s: &StateVector) -> f64 {
        self.damp.iter().zip(s.w.iter()).map(|(c, w)| c * w * w).sum()
    }

    /// A s, evaluated without forming the flat product.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        let sd = self.stiffness.dot(&s.d);
        let mut wdot = Array1::zeros(self.ndof);
        for i in 0..self.ndof {
            wdot[i] = -(sd[i] + self.damp[i] * s.w[i]) / self.mass[i];
        }
        StateVector { d: s.w.clone(), w: wdot }
    }

    /// Coordinate-format dump (row col value) of the nonzero entries of A.
    pub fn export_coordinate(&self, mut out: impl Write) -> std::io::Result<()> {
        let dim = self.dim();
        writeln!(out, "% generator matrix, {dim} x {dim}, coordinate format")?;
        for ((i, j), v) in self.a_mat.indexed_iter() {
            if *v != 0.0 {
                writeln!(out, "{} {} {v:.17e}", i, j)?;
            }
        }
        Ok(())
    }
}

fn add_cell(stiffness: &mut Array2<f64>, i: isize, j: isize, kappa: f64, ndof: usize) {
    let n = ndof as isize;
    if i >= 0 && i < n {
        stiffness[[i as usize, i as usize]] += kappa;
    }
    if j >= 0 && j < n {
        stiffness[[j as usize, j as usize]] += kappa;
    }
    if i >= 0 && i < n && j >= 0 && j < n {
        stiffness[[i as usize, j as usize]] -= kappa;
        stiffness[[j as usize, i as usize]] -= kappa;
    }
}

fn build_generator(stiffness: &Array2<f64>, mass: &Array1<f64>, damp: &Array1<f64>) -> Array2<f64> {
    let n = mass.len();
    let mut a = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        a[[i, n + i]] = 1.0;
    }
    for i in 0..n {
        for j in 0..n {
            a[[n + i, j]] = -stiffness[[i, j]] / mass[i];
        }
        a[[n + i, n + i]] = -damp[i] / mass[i];
    }
    a
}

/// Feller weight at cell midpoints and sigma at nodes, for the cells and
/// nodes of the degenerate subdomain [0,1]. Evaluated cumulatively so each
/// quadrature segment is integrated once.
struct WeightedFields {
    eta_mid: Vec<f64>,
    sigma_node: Vec<f64>,
}

impl WeightedFields {
    /// `left_cells` is the number of cells inside [0,1].
    fn evaluate(mesh: &Mesh, coeffs: &CoefficientSet, left_cells: usize) -> Result<Self> {
        let weights = coeffs.weight_evaluator();
        // interleaved ascending coordinates: node_1, mid_0 is NOT ordered;
        // gather and sort the evaluation points instead.
        let mut points: Vec<f64> = Vec::with_capacity(2 * left_cells + 1);
        for cell in 0..left_cells {
            points.push(mesh.midpoint(cell));
        }
        for node in 1..=left_cells {
            points.push(mesh.node(node));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();

        // cumulative integral of b/a from 1/2 to each point
        let mut log_eta = vec![0.0; points.len()];
        let anchor = points.partition_point(|&p| p < 0.5);
        let mut acc = 0.0;
        let mut prev = 0.5;
        for idx in anchor..points.len() {
            acc += weights.drift_integral(prev, points[idx])?;
            log_eta[idx] = acc;
            prev = points[idx];
        }
        acc = 0.0;
        prev = 0.5;
        for idx in (0..anchor).rev() {
            acc -= weights.drift_integral(points[idx], prev)?;
            log_eta[idx] = acc;
            prev = points[idx];
        }
        let lookup = |x: f64| -> f64 {
            let i = points.partition_point(|&p| p < x);
            debug_assert!(i < points.len() && points[i] == x);
            log_eta[i].exp()
        };

        let mut eta_mid = Vec::with_capacity(left_cells);
        for cell in 0..left_cells {
            eta_mid.push(lookup(mesh.midpoint(cell)));
        }
        let mut sigma_node = vec![0.0; left_cells + 1];
        for node in 1..=left_cells {
            let x = mesh.node(node);
            let sigma = coeffs.a.eval(x)? / lookup(x);
            if sigma <= 0.0 || !sigma.is_finite() {
                return Err(Error::Assembly(format!("sigma non-positive at node x = {x}")));
            }
            sigma_node[node] = sigma;
        }
        Ok(Self { eta_mid, sigma_node })
    }
}
