//! Dense state-vector reference used to cross-check the cluster simulator.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M2 = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn x() -> M2 {
    [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]
}

pub fn y() -> M2 {
    [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]
}

pub fn z() -> M2 {
    [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]
}

pub fn h() -> M2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]]
}

pub fn rx(t: f64) -> M2 {
    let (co, si) = ((t / 2.).cos(), (t / 2.).sin());
    [[c(co, 0.), c(0., -si)], [c(0., -si), c(co, 0.)]]
}

pub fn ry(t: f64) -> M2 {
    let (co, si) = ((t / 2.).cos(), (t / 2.).sin());
    [[c(co, 0.), c(-si, 0.)], [c(si, 0.), c(co, 0.)]]
}

/// Qubit `j` is bit `j` of the basis index.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub amps: Vec<C>,
}

impl Dense {
    pub fn product(kets: &[[C; 2]]) -> Self {
        let n = kets.len();
        let amps = (0..1usize << n)
            .map(|i| (0..n).fold(c(1., 0.), |acc, j| acc * kets[j][(i >> j) & 1]))
            .collect();
        Self { n, amps }
    }

    pub fn from_amps(amps: Vec<C>) -> Self {
        let n = amps.len().trailing_zeros() as usize;
        Self { n, amps }
    }

    pub fn apply(&mut self, m: &M2, t: usize) {
        for i in 0..self.amps.len() {
            if i >> t & 1 == 0 {
                let k = i | 1 << t;
                let (a, b) = (self.amps[i], self.amps[k]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[k] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn cnot(&mut self, ctl: usize, tgt: usize) {
        for i in 0..self.amps.len() {
            if i >> ctl & 1 == 1 && i >> tgt & 1 == 0 {
                self.amps.swap(i, i | 1 << tgt);
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability that qubits `qs` read `bits`.
    pub fn prob(&self, qs: &[usize], bits: &[bool]) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| qs.iter().zip(bits).all(|(&q, &b)| (i >> q & 1 == 1) == b))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Normalized state of the remaining qubits after `qs` read `bits`.
    pub fn condition(&self, qs: &[usize], bits: &[bool]) -> Dense {
        let keep: Vec<usize> = (0..self.n).filter(|j| !qs.contains(j)).collect();
        let mut out = vec![c(0., 0.); 1 << keep.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if qs.iter().zip(bits).all(|(&q, &b)| (i >> q & 1 == 1) == b) {
                let idx = keep.iter().enumerate().fold(0, |acc, (p, &j)| acc | (i >> j & 1) << p);
                out[idx] += *a;
            }
        }
        let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        out.iter_mut().for_each(|a| *a /= norm);
        Dense::from_amps(out)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &[C]) -> f64 {
        self.amps
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum::<C>()
            .norm_sqr()
    }
}
