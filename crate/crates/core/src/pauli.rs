// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pauli strings, weighted sums of strings and state vectors.
//!
//! A string on `n` sites is stored as two bit masks in basis-index order:
//! site `s` owns bit `n - 1 - s`, so site 0 is the most significant qubit
//! and the tensor product runs `site 0 ⊗ site 1 ⊗ …`. Letters are encoded
//! as `(x, z)` bits with `Y = (1, 1)` kept as a letter (not as `XZ`).

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::par::Execution;
use crate::{Error, Result, C64};

/// Largest site count a mask can hold.
pub const MAX_SITES: usize = 64;

/// Largest site count [`OperatorSum::realize`] will turn into a dense matrix.
pub const DENSE_SITE_CAP: usize = 16;

/// Coefficients below this are dropped on merge.
pub const MERGE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A fourth root of unity, `i^k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_SITES, "at most {MAX_SITES} sites");
        PauliString {
            n,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    /// String with `letters[s]` on site `s`.
    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut p = Self::identity(letters.len());
        for (s, &l) in letters.iter().enumerate() {
            p.set(s, l);
        }
        p
    }

    /// Product of single-site letters at the given sites (later entries win).
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut p = Self::identity(n);
        for &(s, l) in sites {
            p.set(s, l);
        }
        p
    }

    /// Parses `"XXIIZZII"`, one letter per site.
    pub fn parse(text: &str) -> Result<Self> {
        let letters = text
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Domain(format!("not a Pauli letter: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.len() > MAX_SITES {
            return Err(Error::Resource(format!("{} sites > {MAX_SITES}", letters.len())));
        }
        Ok(Self::from_letters(&letters))
    }

    #[inline]
    fn bit(&self, site: usize) -> u64 {
        1u64 << (self.n - 1 - site)
    }

    pub fn set(&mut self, site: usize, letter: Pauli) {
        assert!(site < self.n, "site {site} out of range");
        let b = self.bit(site);
        let (x, z) = letter.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Bit masks in basis-index order.
    pub fn masks(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn letter(&self, site: usize) -> Pauli {
        let b = self.bit(site);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|s| self.letter(s)).collect()
    }

    /// Sites carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&s| self.letter(s) != Pauli::I)
            .collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "Pauli strings on {} and {} sites",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Product `self · other` with accumulated phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, q: &PauliString) -> PauliString {
        let (x1, z1, x2, z2) = (self.x, self.z, q.x, q.z);
        let (xa, ya, za) = (x1 & !z1, x1 & z1, !x1 & z1);
        let (xb, yb, zb) = (x2 & !z2, x2 & z2, !x2 & z2);
        // XY = iZ, YZ = iX, ZX = iY and the reversed products carry -i.
        let plus = ((xa & yb) | (ya & zb) | (za & xb)).count_ones() as i64;
        let minus = ((ya & xb) | (za & yb) | (xa & zb)).count_ones() as i64;
        PauliString {
            n: self.n,
            x: x1 ^ x2,
            z: z1 ^ z2,
            phase: self.phase * q.phase * Phase::from_power(plus - minus),
        }
    }

    /// True iff the two strings commute.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    fn commutes_unchecked(&self, q: &PauliString) -> bool {
        // symplectic form: sites where the letters differ and neither is I
        ((self.x & q.z) ^ (self.z & q.x)).count_ones() % 2 == 0
    }

    /// Sign of `<b ^ x| P |b>` once the `i` per `Y` is pulled out.
    #[inline]
    fn sign(z: u64, b: u64) -> f64 {
        if (b & z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{sign}")?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Complex amplitudes over `2^n` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        StateVector {
            n,
            amps: vec![C64::new(0.0, 0.0); 1usize << n],
        }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = Self::zeros(n);
        v.amps[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::Shape(format!(
                "{} amplitudes for {n} sites",
                amps.len()
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn from_dvector(n: usize, v: &DVector<C64>) -> Result<Self> {
        Self::from_amplitudes(n, v.iter().copied().collect())
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::Shape("state dimensions differ".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `<self| op |self>`.
    pub fn expectation(&self, op: &OperatorSum) -> Result<C64> {
        self.inner(&op.apply(self)?)
    }

    /// Multiplies by a phase so the first amplitude above `tol` is real positive.
    pub fn fix_phase(&mut self, tol: f64) {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > tol).copied() {
            let rot = a.conj() / a.norm();
            self.amps.iter_mut().for_each(|v| *v *= rot);
        }
    }
}

/// Complex-weighted sum of Pauli strings on a common site count.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    n: usize,
    terms: Vec<(C64, PauliString)>,
}

#[derive(Clone, Copy)]
struct Kernel {
    x: u64,
    z: u64,
    factor: C64,
}

impl OperatorSum {
    pub fn zero(n: usize) -> Self {
        OperatorSum { n, terms: Vec::new() }
    }

    pub fn from_string(coeff: C64, p: PauliString) -> Self {
        OperatorSum {
            n: p.n,
            terms: vec![(coeff, p)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_string(C64::new(1.0, 0.0), PauliString::identity(n))
    }

    pub fn from_terms(n: usize, terms: Vec<(C64, PauliString)>) -> Result<Self> {
        if let Some((_, p)) = terms.iter().find(|(_, p)| p.n != n) {
            return Err(Error::Shape(format!(
                "term on {} sites in a {n}-site sum",
                p.n
            )));
        }
        Ok(OperatorSum { n, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn push(&mut self, coeff: C64, p: PauliString) -> Result<()> {
        if p.n != self.n {
            return Err(Error::Shape(format!(
                "term on {} sites in a {}-site sum",
                p.n, self.n
            )));
        }
        self.terms.push((coeff, p));
        Ok(())
    }

    pub fn push_real(&mut self, coeff: f64, p: PauliString) -> Result<()> {
        self.push(C64::new(coeff, 0.0), p)
    }

    /// Folds string phases into coefficients, merges equal letter sequences
    /// and drops terms with `|c| < MERGE_TOL`. Order of first appearance kept.
    pub fn normalized(&self) -> Self {
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut merged: Vec<(C64, PauliString)> = Vec::new();
        for (c, p) in &self.terms {
            let coeff = c * p.phase.to_complex();
            let key = (p.x, p.z);
            match index.get(&key) {
                Some(&k) => merged[k].0 += coeff,
                None => {
                    index.insert(key, merged.len());
                    merged.push((coeff, p.clone().with_phase(Phase::ONE)));
                }
            }
        }
        merged.retain(|(c, _)| c.norm() >= MERGE_TOL);
        OperatorSum {
            n: self.n,
            terms: merged,
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        OperatorSum {
            n: self.n,
            terms: self.terms.iter().map(|(c, p)| (c * s, p.clone())).collect(),
        }
    }

    pub fn scaled_real(&self, s: f64) -> Self {
        self.scaled(C64::new(s, 0.0))
    }

    /// Concatenation `self + other` (not merged).
    pub fn plus(&self, other: &OperatorSum) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Shape("operator sums on different site counts".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(OperatorSum { n: self.n, terms })
    }

    /// Operator product, merged.
    pub fn times(&self, other: &OperatorSum) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Shape("operator sums on different site counts".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                terms.push((a * b, p.mul_unchecked(q)));
            }
        }
        Ok(OperatorSum { n: self.n, terms }.normalized())
    }

    /// `[self, other]`, merged.
    pub fn commutator(&self, other: &OperatorSum) -> Result<Self> {
        let ab = self.times(other)?;
        let ba = other.times(self)?;
        Ok(ab.plus(&ba.scaled_real(-1.0))?.normalized())
    }

    pub fn adjoint(&self) -> Self {
        OperatorSum {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (c.conj() * p.phase.to_complex().conj(), p.clone().with_phase(Phase::ONE)))
                .collect(),
        }
    }

    /// `(op + op†)/2`, merged.
    pub fn hermitian_part(&self) -> Self {
        let merged = self.normalized();
        OperatorSum {
            n: self.n,
            terms: merged
                .terms
                .into_iter()
                .map(|(c, p)| (C64::new(c.re, 0.0), p))
                .filter(|(c, _)| c.norm() >= MERGE_TOL)
                .collect(),
        }
    }

    /// `‖op − op†‖` over merged coefficients; zero iff exactly Hermitian.
    pub fn hermitian_residual(&self) -> f64 {
        self.normalized()
            .terms
            .iter()
            .map(|(c, _)| (2.0 * c.im).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest string weight, 0 for an empty sum.
    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.weight()).max().unwrap_or(0)
    }

    /// True when every term commutes with `p` (sufficient for `[op, p] = 0`).
    pub fn commutes_termwise(&self, p: &PauliString) -> Result<bool> {
        if p.n != self.n {
            return Err(Error::Shape("string and sum on different site counts".into()));
        }
        Ok(self.terms.iter().all(|(_, q)| q.commutes_unchecked(p)))
    }

    fn kernels(&self) -> Vec<Kernel> {
        self.terms
            .iter()
            .map(|(c, p)| {
                let ny = (p.x & p.z).count_ones() as i64;
                Kernel {
                    x: p.x,
                    z: p.z,
                    factor: c * (p.phase * Phase::from_power(ny)).to_complex(),
                }
            })
            .collect()
    }

    /// Dense matrix in basis-index order. Refuses more than `DENSE_SITE_CAP` sites.
    pub fn realize(&self) -> Result<DMatrix<C64>> {
        self.realize_capped(DENSE_SITE_CAP)
    }

    pub fn realize_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        if self.n > cap {
            return Err(Error::Resource(format!(
                "dense realization of {} sites exceeds the cap of {cap}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for k in self.kernels() {
            for b in 0..dim as u64 {
                let r = (b ^ k.x) as usize;
                m[(r, b as usize)] += k.factor * PauliString::sign(k.z, b);
            }
        }
        Ok(m)
    }

    /// Matrix-free `op · psi`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.apply_with(psi, Execution::default())
    }

    pub fn apply_with(&self, psi: &StateVector, exec: Execution) -> Result<StateVector> {
        if psi.n != self.n {
            return Err(Error::Shape(format!(
                "{}-site operator on a {}-site state",
                self.n, psi.n
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); psi.amps.len()];
        self.apply_slice(&psi.amps, &mut out, exec);
        Ok(StateVector { n: self.n, amps: out })
    }

    /// Gather kernel: `out[c] = Σ_k f_k (−1)^{|(c⊕x_k) ∧ z_k|} psi[c ⊕ x_k]`.
    pub fn apply_slice(&self, psi: &[C64], out: &mut [C64], exec: Execution) {
        debug_assert_eq!(psi.len(), 1usize << self.n);
        debug_assert_eq!(out.len(), psi.len());
        let kernels = self.kernels();
        exec.fill(out, |c| {
            let c = c as u64;
            let mut acc = C64::new(0.0, 0.0);
            for k in &kernels {
                let b = c ^ k.x;
                let v = k.factor * psi[b as usize];
                if (b & k.z).count_ones() % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            acc
        });
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, p)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "({:+}{:+}i){}", c.re, c.im, p)?;
        }
        Ok(())
    }
}
