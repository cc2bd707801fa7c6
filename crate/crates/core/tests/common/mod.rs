//! Shared test oracles: an element-level nodal-analysis solver that knows
//! nothing about chain matrices or the closed-form BVD admittance, and the
//! filter parameter kit used across the oracle and acceptance suites.
#![allow(dead_code)]

use mpfilter::bvd::{BvdResonator, Quality, ResonatorSpec};
use mpfilter::network::LadderFilterSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const TAU: f64 = std::f64::consts::TAU;

/// Two-terminal circuit element.
#[derive(Debug, Clone, Copy)]
pub enum Element {
    Resistor(f64),
    Inductor(f64),
    Capacitor(f64),
}

impl Element {
    fn admittance(&self, omega: f64) -> Complex64 {
        match *self {
            Element::Resistor(r) => Complex64::new(1.0 / r, 0.0),
            Element::Inductor(l) => Complex64::new(0.0, -1.0 / (omega * l)),
            Element::Capacitor(c) => Complex64::new(0.0, omega * c),
        }
    }
}

/// Flat netlist over numbered nodes; node 0 is ground.
#[derive(Debug, Default)]
pub struct Circuit {
    node_count: usize,
    elements: Vec<(usize, usize, Element)>,
}

impl Circuit {
    pub fn new() -> Self {
        Circuit::default()
    }

    /// Allocates a fresh node and returns its index (1-based).
    pub fn add_node(&mut self) -> usize {
        self.node_count += 1;
        self.node_count
    }

    pub fn add(&mut self, a: usize, b: usize, e: Element) {
        self.node_count = self.node_count.max(a).max(b);
        self.elements.push((a, b, e));
    }

    /// Stamps one BVD resonator between nodes `a` and `b`: the static
    /// capacitor in parallel with the R-L-C branch laid out through two
    /// internal nodes. The resistor stamp requires `r > 0`.
    pub fn add_bvd(&mut self, a: usize, b: usize, res: &BvdResonator) {
        assert!(res.r() > 0.0, "nodal oracle needs lossy resonators");
        self.add(a, b, Element::Capacitor(res.c_g()));
        let n1 = self.add_node();
        let n2 = self.add_node();
        self.add(a, n1, Element::Resistor(res.r()));
        self.add(n1, n2, Element::Inductor(res.l()));
        self.add(n2, b, Element::Capacitor(res.c()));
    }

    fn y_matrix(&self, omega: f64) -> DMatrix<Complex64> {
        let n = self.node_count;
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for &(a, b, e) in &self.elements {
            let ya = e.admittance(omega);
            if a > 0 {
                y[(a - 1, a - 1)] += ya;
            }
            if b > 0 {
                y[(b - 1, b - 1)] += ya;
            }
            if a > 0 && b > 0 {
                y[(a - 1, b - 1)] -= ya;
                y[(b - 1, a - 1)] -= ya;
            }
        }
        y
    }

    fn solve(&self, omega: f64, current: DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.y_matrix(omega)
            .lu()
            .solve(&current)
            .expect("singular nodal matrix in oracle")
    }

    /// Driving-point admittance between `node` and ground: inject 1 A,
    /// read the node voltage.
    pub fn driving_point_admittance(&self, node: usize, omega: f64) -> Complex64 {
        let mut i = DMatrix::<Complex64>::zeros(self.node_count, 1);
        i[(node - 1, 0)] = Complex64::new(1.0, 0.0);
        let v = self.solve(omega, i);
        Complex64::new(1.0, 0.0) / v[(node - 1, 0)]
    }

    /// `(S11, S21)` between two port nodes with a common real reference
    /// impedance, by Norton-source nodal analysis: a 1 V source behind `z0`
    /// at port 1 and a `z0` load at port 2 give `S11 = 2·V1 − 1` and
    /// `S21 = 2·V2`.
    pub fn s_params(&self, port1: usize, port2: usize, z0: f64, omega: f64) -> (Complex64, Complex64) {
        let g0 = Complex64::new(1.0 / z0, 0.0);
        let mut y = self.y_matrix(omega);
        y[(port1 - 1, port1 - 1)] += g0;
        y[(port2 - 1, port2 - 1)] += g0;
        let mut i = DMatrix::<Complex64>::zeros(self.node_count, 1);
        i[(port1 - 1, 0)] = g0;
        let v = y.lu().solve(&i).expect("singular nodal matrix in oracle");
        let s11 = 2.0 * v[(port1 - 1, 0)] - Complex64::new(1.0, 0.0);
        let s21 = 2.0 * v[(port2 - 1, 0)];
        (s11, s21)
    }
}

/// Ladder netlist matching the chain-matrix construction: `order` series
/// resonators in a row, with `multiplicity` shunt resonators stamped from
/// every internal junction to ground. Returns the circuit and its two port
/// nodes.
pub fn ladder_circuit(spec: &LadderFilterSpec) -> (Circuit, usize, usize) {
    let series = spec.series().to_bvd();
    let shunt = spec.shunt().to_bvd();
    let mut ckt = Circuit::new();
    let port1 = ckt.add_node();
    let mut left = port1;
    for stage in 0..spec.order() {
        let right = ckt.add_node();
        ckt.add_bvd(left, right, &series);
        if stage + 1 < spec.order() {
            for _ in 0..spec.shunt_multiplicity() {
                ckt.add_bvd(right, 0, &shunt);
            }
        }
        left = right;
    }
    (ckt, port1, left)
}

/// The simulated filter family from the circuit-analysis figure: order 3,
/// shunt resonance 3.00 GHz, series resonance 3.18 GHz, equal couplings
/// chosen so the series antiresonance lands at 3.35 GHz, two resonators per
/// shunt node, 50 Ω system.
pub const FIG4B_F_SERIES: f64 = 3.18e9;
pub const FIG4B_F_SHUNT: f64 = 3.00e9;
pub const FIG4B_K2: f64 = 0.1357;
pub const FIG4B_CG: f64 = 1.0e-12;

pub fn fig4b_ladder(q: Quality) -> LadderFilterSpec {
    let series = ResonatorSpec::from_hz(FIG4B_F_SERIES, FIG4B_K2, q, FIG4B_CG).unwrap();
    let shunt = ResonatorSpec::from_hz(FIG4B_F_SHUNT, FIG4B_K2, q, FIG4B_CG).unwrap();
    LadderFilterSpec::new(3, series, shunt, 2, 50.0).unwrap()
}

/// Random but benign ladder specs: parameters span the physically sensible
/// ranges while keeping chain entries small enough that the float
/// determinant stays meaningful. The returned grid avoids the element
/// singularities by 2%, where entries blow up and a float determinant
/// check would measure rounding instead of reciprocity.
pub fn random_ladder(
    rng: &mut rand_chacha::ChaCha8Rng,
    lossless: bool,
) -> (LadderFilterSpec, Vec<f64>) {
    use rand::Rng;
    let f_s: f64 = rng.gen_range(1.0e9..8.0e9);
    let k2: f64 = rng.gen_range(0.01..0.08);
    let ratio = (1.0 + 8.0 * k2 / std::f64::consts::PI.powi(2)).sqrt();
    let detune: f64 = rng.gen_range(0.98..1.02);
    let f_p = f_s / ratio * detune;
    let q = if lossless {
        Quality::Unbounded
    } else {
        Quality::Finite(rng.gen_range(100.0..1000.0))
    };
    let cg_s: f64 = rng.gen_range(0.3e-12..3e-12);
    let cg_p: f64 = rng.gen_range(0.3e-12..3e-12);
    let order = rng.gen_range(1..=3);
    let mult = rng.gen_range(1..=2);
    let z0: f64 = rng.gen_range(30.0..80.0);
    let series = ResonatorSpec::from_hz(f_s, k2, q, cg_s).unwrap();
    let shunt = ResonatorSpec::from_hz(f_p, k2, q, cg_p).unwrap();
    let spec = LadderFilterSpec::new(order, series, shunt, mult, z0).unwrap();

    let singular = {
        let (a, b) = spec.series().to_bvd().resonance_antiresonance();
        let (c, d) = spec.shunt().to_bvd().resonance_antiresonance();
        [a, b, c, d]
    };
    let mut grid = Vec::with_capacity(48);
    let mut f = f_s * 0.85;
    while grid.len() < 48 {
        f *= 1.0 + rng.gen_range(0.002..0.01);
        if singular.iter().all(|s| (f / s - 1.0).abs() > 0.02) {
            grid.push(f);
        }
    }
    (spec, grid)
}
