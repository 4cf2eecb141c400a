//! Dense reference simulator. Circuits are written out by hand from the
//! physical description and every gate is a full Kronecker-product matrix,
//! so nothing here shares code with the register engine or the builders.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use faraday_core::protocol::{Family, Payload};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;
pub type Mat = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn eye(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

pub fn matvec(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn qwp1() -> Mat {
    let h = FRAC_1_SQRT_2;
    vec![vec![c(h, 0.0), c(0.0, -h)], vec![c(h, 0.0), c(0.0, h)]]
}

pub fn hadamard() -> Mat {
    let h = FRAC_1_SQRT_2;
    vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
}

pub fn pauli(name: char) -> Mat {
    match name {
        'I' => eye(2),
        'X' => vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ],
        'Z' => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
        _ => panic!("unknown Pauli {name}"),
    }
}

/// A register with named qubits, first name most significant.
pub struct Dense {
    pub names: Vec<String>,
    pub amps: Vec<C>,
}

impl Dense {
    /// Product of single-qubit vectors.
    pub fn product(qubits: &[(&str, [C; 2])]) -> Self {
        let mut amps = vec![c(1.0, 0.0)];
        for (_, v) in qubits {
            amps = amps.iter().flat_map(|a| [a * v[0], a * v[1]]).collect();
        }
        Dense {
            names: qubits.iter().map(|(n, _)| n.to_string()).collect(),
            amps,
        }
    }

    pub fn pos(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no qubit {name}"))
    }

    fn embed(&self, target: &str, u: &Mat) -> Mat {
        let p = self.pos(target);
        let id = eye(2);
        let mut m = eye(1);
        for i in 0..self.names.len() {
            m = kron(&m, if i == p { u } else { &id });
        }
        m
    }

    pub fn single(&mut self, target: &str, u: &Mat) {
        self.amps = matvec(&self.embed(target, u), &self.amps);
    }

    /// Cavity reflection: `e^{i phi}` when photon and atom bits agree (L0,
    /// R1), `e^{i phi0}` otherwise.
    pub fn reflect(&mut self, photon: &str, atom: &str, phi: f64, phi0: f64) {
        let n = self.names.len();
        let (p, a) = (self.pos(photon), self.pos(atom));
        // The gate is diagonal; multiply entrywise.
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let bp = (i >> (n - 1 - p)) & 1;
            let ba = (i >> (n - 1 - a)) & 1;
            *amp *= C::from_polar(1.0, if bp == ba { phi } else { phi0 });
        }
    }

    pub fn bit(&self, index: usize, name: &str) -> usize {
        (index >> (self.names.len() - 1 - self.pos(name))) & 1
    }

    /// Unnormalized amplitudes of `rest` (in register order) for the given
    /// measured bits.
    pub fn project(&self, measured: &[(&str, usize)]) -> (Vec<String>, Vec<C>) {
        let rest: Vec<String> = self
            .names
            .iter()
            .filter(|n| !measured.iter().any(|(m, _)| m == n))
            .cloned()
            .collect();
        let mut out = vec![c(0.0, 0.0); 1 << rest.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if measured.iter().all(|(m, b)| self.bit(i, m) == *b) {
                let mut j = 0;
                for r in &rest {
                    j = (j << 1) | self.bit(i, r);
                }
                out[j] += a;
            }
        }
        (rest, out)
    }

    /// Amplitudes rearranged into `order`.
    pub fn reordered(&self, order: &[&str]) -> Vec<C> {
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0;
            for n in order {
                j = (j << 1) | self.bit(i, n);
            }
            out[j] = *a;
        }
        out
    }
}

pub fn controls(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i == 0 {
                "B".to_string()
            } else {
                format!("B{i}")
            }
        })
        .collect()
}

/// Hand-written circuit for one protocol at the ideal phases (pi, pi/2).
/// Returns the pre-measurement register, the measured qubits and the
/// teleport targets.
pub struct Circuit {
    pub state: Dense,
    pub measured: Vec<String>,
    pub targets: Vec<String>,
}

pub fn circuit(family: Family, n: usize, payload: &Payload) -> Circuit {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let plus = [h, h];
    let zero = [c(1.0, 0.0), c(0.0, 0.0)];
    let (a, b) = (payload.alpha, payload.beta);
    let ctl = controls(n);
    let plate = |crossed: usize| if crossed % 2 == 1 { qwp1() } else { hadamard() };
    let (phi, phi0) = (PI, FRAC_PI_2);

    match family {
        Family::CtSuperposition => {
            let mut qubits: Vec<(&str, [C; 2])> = vec![("A", plus)];
            qubits.extend(ctl.iter().map(|l| (l.as_str(), plus)));
            qubits.push(("C", [a, b]));
            qubits.push(("F", plus));
            let mut s = Dense::product(&qubits);
            s.reflect("F", "A", phi, phi0);
            for l in &ctl {
                s.reflect("F", l, phi, phi0);
            }
            s.reflect("F", "C", phi, phi0);
            s.single("F", &plate(n));
            s.single("C", &hadamard());
            let mut measured = vec!["F".to_string(), "C".to_string()];
            measured.extend(ctl);
            Circuit {
                state: s,
                measured,
                targets: vec!["A".into()],
            }
        }
        Family::CptEntangled => {
            let mut qubits: Vec<(&str, [C; 2])> = vec![("A", plus)];
            qubits.extend(ctl.iter().map(|l| (l.as_str(), plus)));
            qubits.push(("C", zero));
            qubits.push(("D", zero));
            qubits.push(("F", plus));
            let mut s = Dense::product(&qubits);
            load_pair(&mut s, "C", "D", a, b);
            s.reflect("F", "A", phi, phi0);
            for l in &ctl {
                s.reflect("F", l, phi, phi0);
            }
            s.reflect("F", "C", phi, phi0);
            s.single("F", &plate(n));
            s.single("C", &hadamard());
            let mut measured = vec!["F".to_string(), "C".to_string()];
            measured.extend(ctl);
            Circuit {
                state: s,
                measured,
                targets: vec!["A".into(), "D".into()],
            }
        }
        Family::CtEntangled => {
            let mut qubits: Vec<(&str, [C; 2])> = vec![("A", plus)];
            qubits.extend(ctl.iter().map(|l| (l.as_str(), plus)));
            qubits.push(("C", zero));
            qubits.push(("D", plus));
            qubits.push(("E", zero));
            qubits.push(("F1", plus));
            qubits.push(("F2", plus));
            let mut s = Dense::product(&qubits);
            load_pair(&mut s, "C", "E", a, b);
            s.reflect("F2", "A", phi, phi0);
            for l in &ctl {
                s.reflect("F2", l, phi, phi0);
            }
            s.reflect("F2", "C", phi, phi0);
            s.reflect("F1", "D", phi, phi0);
            s.reflect("F1", "E", phi, phi0);
            s.single("F2", &plate(n));
            s.single("F1", &hadamard());
            s.single("C", &hadamard());
            s.single("E", &hadamard());
            let mut measured = vec![
                "F2".to_string(),
                "C".to_string(),
                "F1".to_string(),
                "E".to_string(),
            ];
            measured.extend(ctl);
            Circuit {
                state: s,
                measured,
                targets: vec!["A".into(), "D".into()],
            }
        }
    }
}

/// Replaces `|00>` on (x, y) by `alpha|01> + beta|10>`.
fn load_pair(s: &mut Dense, x: &str, y: &str, alpha: C, beta: C) {
    let mut out = vec![c(0.0, 0.0); s.amps.len()];
    let n = s.names.len();
    let (bx, by) = (1 << (n - 1 - s.pos(x)), 1 << (n - 1 - s.pos(y)));
    for (i, amp) in s.amps.iter().enumerate() {
        if i & (bx | by) == 0 {
            out[i | by] += alpha * amp;
            out[i | bx] += beta * amp;
        }
    }
    s.amps = out;
}

/// The payload as it should appear on the teleport targets.
pub fn intended(family: Family, payload: &Payload) -> Vec<C> {
    let z = c(0.0, 0.0);
    match family {
        Family::CtSuperposition => vec![payload.alpha, payload.beta],
        _ => vec![z, payload.alpha, payload.beta, z],
    }
}

/// Fidelity of `ops` (one Pauli string per target, e.g. "ZX") applied to
/// `residual`, against `target`. Both are normalized here.
pub fn corrected_fidelity(ops: &[String], residual: &[C], target: &[C]) -> f64 {
    let mut m = eye(1);
    for op in ops {
        let mut f = eye(2);
        for p in op.chars() {
            f = matmul(&f, &pauli(p));
        }
        m = kron(&m, &f);
    }
    let v = matvec(&m, residual);
    let overlap: C = target.iter().zip(&v).map(|(t, x)| t.conj() * x).sum();
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let nt: f64 = target.iter().map(|x| x.norm_sqr()).sum();
    overlap.norm_sqr() / (nv * nt)
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn random_payloads(n: usize, seed: u64) -> Vec<Payload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Payload::random(&mut rng)).collect()
}

pub fn random_phase<R: Rng>(rng: &mut R) -> C {
    C::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Largest amplitude gap after aligning `a` to `b`'s global phase.
pub fn phase_aligned_gap(a: &[C], b: &[C]) -> f64 {
    let overlap: C = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let rot = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x * rot - y).norm())
        .fold(0.0, f64::max)
}
