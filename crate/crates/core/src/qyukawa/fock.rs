//! Truncated two-sector occupation basis.
//!
//! The one-particle spaces are the lowest eigenmodes of −Δ + V for the
//! nucleon sector and selected momentum nodes inside the cutoff support for
//! the meson sector. Basis states are occupation pairs enumerated
//! lexicographically, nucleon occupations outermost.

use std::collections::HashMap;

use thiserror::Error;

use crate::linalg;
use crate::model::GridPair;
use crate::rng::CounterRng;
use crate::skg;
use crate::C64;

pub const DIMENSION_GUARD: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NucleonSector {
    /// All occupations with total ≤ cap.
    Capped(u8),
    /// Fixed total nucleon number.
    Fixed(u8),
}

/// Mode data shared by the quantum build and the mode-truncated classical
/// system: nucleon eigenpairs, meson nodes, and the coupling tensor
/// D^μ_{ab} = √Δk G(k_μ) (2π)^{-1/2} Δx Σ_i φ_a φ_b(x_i) e^{i k_μ x_i}.
#[derive(Debug, Clone)]
pub struct FockSpec {
    pub hslash: f64,
    pub nucleon_energies: Vec<f64>,
    /// Real eigenmode samples on the position grid (d_u × N).
    pub nucleon_modes: Vec<Vec<f64>>,
    /// Momentum-grid indices of the retained meson nodes.
    pub meson_indices: Vec<usize>,
    pub meson_omegas: Vec<f64>,
    /// Coupling matrices, one d_u×d_u row-major block per meson mode;
    /// symmetric in (a, b).
    pub coupling: Vec<Vec<C64>>,
    pub nucleon_sector: NucleonSector,
    pub meson_cap: u8,
    /// Quadrature weights of the generating grid, kept for projections.
    pub dx: f64,
    pub dk: f64,
}

#[derive(Debug, Error)]
pub enum FockError {
    #[error("basis dimension {0} exceeds the guard {DIMENSION_GUARD}; reduce caps or modes")]
    DimensionOverflow(usize),
    #[error("hslash must lie in (0, 1]")]
    BadHslash,
    #[error("meson node {0} lies outside the cutoff support")]
    NodeOutsideCutoff(f64),
    #[error("coherent preparation captured only {captured} of the norm; suggested caps: nucleon {suggested_nucleon}, meson {suggested_meson}")]
    TruncationInadequate {
        captured: f64,
        suggested_nucleon: u8,
        suggested_meson: u8,
    },
    #[error("state or test function has wrong mode count")]
    ModeMismatch,
}

impl FockSpec {
    /// Builds the spec on a grid: `d_u` nucleon eigenmodes, meson nodes at
    /// the grid points nearest to `meson_ks`.
    pub fn build(
        grid: &GridPair,
        d_u: usize,
        meson_ks: &[f64],
        nucleon_sector: NucleonSector,
        meson_cap: u8,
        hslash: f64,
        rng: &mut CounterRng,
    ) -> Result<Self, FockError> {
        if !(hslash > 0.0 && hslash <= 1.0) {
            return Err(FockError::BadHslash);
        }
        let pairs = skg::schrodinger_eigenpairs(grid, d_u, rng);
        let nucleon_energies: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let nucleon_modes: Vec<Vec<f64>> = pairs
            .iter()
            .map(|p| p.1.iter().map(|c| c.re).collect())
            .collect();
        let mut meson_indices = Vec::with_capacity(meson_ks.len());
        let mut meson_omegas = Vec::with_capacity(meson_ks.len());
        for &k in meson_ks {
            let j = grid.nearest_k_index(k);
            // the band is defined by the cutoff radius; a zero amplitude
            // (decoupled model) still carries free meson modes
            if grid.k[j].abs() >= grid.params.cutoff.radius {
                return Err(FockError::NodeOutsideCutoff(k));
            }
            meson_indices.push(j);
            meson_omegas.push(grid.omega[j]);
        }
        let coupling = coupling_tensor(grid, &nucleon_modes, &meson_indices);
        Ok(Self {
            hslash,
            nucleon_energies,
            nucleon_modes,
            meson_indices,
            meson_omegas,
            coupling,
            nucleon_sector,
            meson_cap,
            dx: grid.dx,
            dk: grid.dk,
        })
    }

    pub fn d_u(&self) -> usize {
        self.nucleon_energies.len()
    }

    pub fn meson_count(&self) -> usize {
        self.meson_indices.len()
    }

    /// Projects a position-grid function onto the nucleon modes.
    pub fn project_nucleon(&self, u: &[C64]) -> Vec<C64> {
        self.nucleon_modes
            .iter()
            .map(|phi| {
                let mut acc = C64::new(0.0, 0.0);
                for (p, ui) in phi.iter().zip(u) {
                    acc += p * ui;
                }
                acc * self.dx
            })
            .collect()
    }

    /// Projects a momentum-grid function onto the meson node modes
    /// (amplitude √Δk · f(k_μ)).
    pub fn project_meson(&self, f: &[C64]) -> Vec<C64> {
        self.meson_indices
            .iter()
            .map(|&j| self.dk.sqrt() * f[j])
            .collect()
    }

    /// Embeds meson mode amplitudes back onto the momentum grid.
    pub fn embed_meson(&self, amps: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (&j, &a) in self.meson_indices.iter().zip(amps) {
            out[j] = a / self.dk.sqrt();
        }
        out
    }
}

/// D^μ_{ab} blocks for the retained modes.
pub fn coupling_tensor(
    grid: &GridPair,
    nucleon_modes: &[Vec<f64>],
    meson_indices: &[usize],
) -> Vec<Vec<C64>> {
    let d_u = nucleon_modes.len();
    let g = grid.coupling_profile();
    let two_pi_sqrt = (2.0 * std::f64::consts::PI).sqrt();
    meson_indices
        .iter()
        .map(|&j| {
            let k = grid.k[j];
            let prefactor = grid.dk.sqrt() * g[j] / two_pi_sqrt;
            let mut block = vec![C64::new(0.0, 0.0); d_u * d_u];
            for a in 0..d_u {
                for b in a..d_u {
                    let mut acc = C64::new(0.0, 0.0);
                    for (i, &x) in grid.x.iter().enumerate() {
                        acc += nucleon_modes[a][i] * nucleon_modes[b][i]
                            * C64::from_polar(1.0, k * x);
                    }
                    let val = acc * grid.dx * prefactor;
                    block[a * d_u + b] = val;
                    block[b * d_u + a] = val;
                }
            }
            block
        })
        .collect()
}

/// Enumerated occupation basis with precomputed ladder tables.
#[derive(Debug)]
pub struct FockBasis {
    pub spec: FockSpec,
    /// (nucleon occupations, meson occupations), nucleon-major lexicographic.
    pub states: Vec<(Box<[u8]>, Box<[u8]>)>,
    index: HashMap<(Box<[u8]>, Box<[u8]>), u32>,
    n_nuc: usize,
    n_mes: usize,
    /// ψ*_a ψ_b action per state: dim × d_u² entries (target, √ factor);
    /// u32::MAX marks an invalid move.
    nuc_pair_target: Vec<u32>,
    nuc_pair_factor: Vec<f64>,
    /// Meson ladders per state and mode: (lower target, √m), (raise target, √(m+1)).
    mes_lower_target: Vec<u32>,
    mes_lower_factor: Vec<f64>,
    mes_raise_target: Vec<u32>,
    mes_raise_factor: Vec<f64>,
    /// Nucleon single ladders (capped sectors only; invalid in fixed sectors).
    nuc_lower_target: Vec<u32>,
    nuc_lower_factor: Vec<f64>,
    nuc_raise_target: Vec<u32>,
    nuc_raise_factor: Vec<f64>,
}

fn enumerate_occupations(modes: usize, total_cap: u8, fixed: Option<u8>) -> Vec<Box<[u8]>> {
    let mut out = Vec::new();
    let mut current = vec![0u8; modes];
    fn recurse(
        out: &mut Vec<Box<[u8]>>,
        current: &mut Vec<u8>,
        mode: usize,
        remaining: u8,
        fixed: Option<u8>,
        used: u8,
    ) {
        if mode == current.len() {
            if fixed.map_or(true, |n| used == n) {
                out.push(current.clone().into_boxed_slice());
            }
            return;
        }
        for occ in 0..=remaining {
            current[mode] = occ;
            recurse(out, current, mode + 1, remaining - occ, fixed, used + occ);
        }
        current[mode] = 0;
    }
    recurse(&mut out, &mut current, 0, total_cap, fixed, 0);
    out
}

impl FockBasis {
    pub fn new(spec: FockSpec) -> Result<Self, FockError> {
        let d_u = spec.d_u();
        let m = spec.meson_count();
        let nuc_occs = match spec.nucleon_sector {
            NucleonSector::Capped(cap) => enumerate_occupations(d_u, cap, None),
            NucleonSector::Fixed(n) => enumerate_occupations(d_u, n, Some(n)),
        };
        let mes_occs = enumerate_occupations(m, spec.meson_cap, None);
        let dim = nuc_occs.len() * mes_occs.len();
        if dim > DIMENSION_GUARD {
            return Err(FockError::DimensionOverflow(dim));
        }
        let mut states = Vec::with_capacity(dim);
        for nu in &nuc_occs {
            for me in &mes_occs {
                states.push((nu.clone(), me.clone()));
            }
        }
        let mut index = HashMap::with_capacity(dim);
        for (i, s) in states.iter().enumerate() {
            index.insert(s.clone(), i as u32);
        }
        let mut basis = Self {
            spec,
            states,
            index,
            n_nuc: nuc_occs.len(),
            n_mes: mes_occs.len(),
            nuc_pair_target: Vec::new(),
            nuc_pair_factor: Vec::new(),
            mes_lower_target: Vec::new(),
            mes_lower_factor: Vec::new(),
            mes_raise_target: Vec::new(),
            mes_raise_factor: Vec::new(),
            nuc_lower_target: Vec::new(),
            nuc_lower_factor: Vec::new(),
            nuc_raise_target: Vec::new(),
            nuc_raise_factor: Vec::new(),
        };
        basis.build_tables();
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn nucleon_block_count(&self) -> usize {
        self.n_nuc
    }

    pub fn meson_block_count(&self) -> usize {
        self.n_mes
    }

    pub fn lookup(&self, nuc: &[u8], mes: &[u8]) -> Option<usize> {
        self.index
            .get(&(Box::from(nuc), Box::from(mes)))
            .map(|&i| i as usize)
    }

    fn build_tables(&mut self) {
        let d_u = self.spec.d_u();
        let m = self.spec.meson_count();
        let dim = self.dim();
        self.nuc_pair_target = vec![u32::MAX; dim * d_u * d_u];
        self.nuc_pair_factor = vec![0.0; dim * d_u * d_u];
        self.mes_lower_target = vec![u32::MAX; dim * m];
        self.mes_lower_factor = vec![0.0; dim * m];
        self.mes_raise_target = vec![u32::MAX; dim * m];
        self.mes_raise_factor = vec![0.0; dim * m];
        self.nuc_lower_target = vec![u32::MAX; dim * d_u];
        self.nuc_lower_factor = vec![0.0; dim * d_u];
        self.nuc_raise_target = vec![u32::MAX; dim * d_u];
        self.nuc_raise_factor = vec![0.0; dim * d_u];
        let cap_nuc = match self.spec.nucleon_sector {
            NucleonSector::Capped(c) => Some(c),
            NucleonSector::Fixed(_) => None,
        };
        let mut scratch_nuc: Vec<u8> = vec![0; d_u];
        let mut scratch_mes: Vec<u8> = vec![0; m];
        for s in 0..dim {
            let (nuc, mes) = (&self.states[s].0, &self.states[s].1);
            // ψ*_a ψ_b
            for b in 0..d_u {
                if nuc[b] == 0 {
                    continue;
                }
                for a in 0..d_u {
                    let slot = s * d_u * d_u + a * d_u + b;
                    if a == b {
                        self.nuc_pair_target[slot] = s as u32;
                        self.nuc_pair_factor[slot] = nuc[a] as f64;
                        continue;
                    }
                    scratch_nuc.copy_from_slice(nuc);
                    scratch_nuc[b] -= 1;
                    scratch_nuc[a] += 1;
                    if let Some(&t) = self
                        .index
                        .get(&(Box::from(&scratch_nuc[..]), mes.clone()))
                    {
                        self.nuc_pair_target[slot] = t;
                        self.nuc_pair_factor[slot] =
                            ((nuc[b] as f64) * (nuc[a] as f64 + 1.0)).sqrt();
                    }
                }
            }
            // meson ladders
            for mu in 0..m {
                let slot = s * m + mu;
                if mes[mu] > 0 {
                    scratch_mes.copy_from_slice(mes);
                    scratch_mes[mu] -= 1;
                    if let Some(&t) = self
                        .index
                        .get(&(nuc.clone(), Box::from(&scratch_mes[..])))
                    {
                        self.mes_lower_target[slot] = t;
                        self.mes_lower_factor[slot] = (mes[mu] as f64).sqrt();
                    }
                }
                if mes[mu] < self.spec.meson_cap {
                    scratch_mes.copy_from_slice(mes);
                    scratch_mes[mu] += 1;
                    if let Some(&t) = self
                        .index
                        .get(&(nuc.clone(), Box::from(&scratch_mes[..])))
                    {
                        self.mes_raise_target[slot] = t;
                        self.mes_raise_factor[slot] = (mes[mu] as f64 + 1.0).sqrt();
                    }
                }
            }
            // nucleon single ladders (only meaningful in capped sectors)
            if let Some(cap) = cap_nuc {
                let total: u8 = nuc.iter().sum();
                for a in 0..d_u {
                    let slot = s * d_u + a;
                    if nuc[a] > 0 {
                        scratch_nuc.copy_from_slice(nuc);
                        scratch_nuc[a] -= 1;
                        if let Some(&t) = self
                            .index
                            .get(&(Box::from(&scratch_nuc[..]), mes.clone()))
                        {
                            self.nuc_lower_target[slot] = t;
                            self.nuc_lower_factor[slot] = (nuc[a] as f64).sqrt();
                        }
                    }
                    if total < cap {
                        scratch_nuc.copy_from_slice(nuc);
                        scratch_nuc[a] += 1;
                        if let Some(&t) = self
                            .index
                            .get(&(Box::from(&scratch_nuc[..]), mes.clone()))
                        {
                            self.nuc_raise_target[slot] = t;
                            self.nuc_raise_factor[slot] = (nuc[a] as f64 + 1.0).sqrt();
                        }
                    }
                }
            }
        }
    }

    pub(crate) fn nuc_pair_table_target(&self, slot: usize) -> u32 {
        self.nuc_pair_target[slot]
    }

    pub(crate) fn nuc_pair_table_factor(&self, slot: usize) -> f64 {
        self.nuc_pair_factor[slot]
    }

    pub(crate) fn mes_lower_table_target(&self, slot: usize) -> u32 {
        self.mes_lower_target[slot]
    }

    pub(crate) fn mes_raise_table_target(&self, slot: usize) -> u32 {
        self.mes_raise_target[slot]
    }

    /// y += scale · Σ_ab c_ab ħ ψ*_a ψ_b x (one-body nucleon operator,
    /// ħ-scaled).
    pub fn apply_nucleon_one_body(&self, c: &[C64], x: &[C64], y: &mut [C64], scale: C64) {
        let d_u = self.spec.d_u();
        let hs = self.spec.hslash;
        for s in 0..self.dim() {
            let xs = x[s];
            if xs.norm_sqr() == 0.0 {
                continue;
            }
            let base = s * d_u * d_u;
            for ab in 0..d_u * d_u {
                let t = self.nuc_pair_target[base + ab];
                if t == u32::MAX {
                    continue;
                }
                let coeff = c[ab];
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                y[t as usize] += scale * coeff * (hs * self.nuc_pair_factor[base + ab]) * xs;
            }
        }
    }

    /// y += scale · a_ħ(η) x for meson mode amplitudes η.
    pub fn apply_meson_annihilate(&self, eta: &[C64], x: &[C64], y: &mut [C64], scale: C64) {
        let m = self.spec.meson_count();
        let hs_sqrt = self.spec.hslash.sqrt();
        for s in 0..self.dim() {
            let xs = x[s];
            if xs.norm_sqr() == 0.0 {
                continue;
            }
            let base = s * m;
            for mu in 0..m {
                let t = self.mes_lower_target[base + mu];
                if t == u32::MAX {
                    continue;
                }
                y[t as usize] +=
                    scale * eta[mu].conj() * (hs_sqrt * self.mes_lower_factor[base + mu]) * xs;
            }
        }
    }

    /// y += scale · a*_ħ(η) x for meson mode amplitudes η.
    pub fn apply_meson_create(&self, eta: &[C64], x: &[C64], y: &mut [C64], scale: C64) {
        let m = self.spec.meson_count();
        let hs_sqrt = self.spec.hslash.sqrt();
        for s in 0..self.dim() {
            let xs = x[s];
            if xs.norm_sqr() == 0.0 {
                continue;
            }
            let base = s * m;
            for mu in 0..m {
                let t = self.mes_raise_target[base + mu];
                if t == u32::MAX {
                    continue;
                }
                y[t as usize] +=
                    scale * eta[mu] * (hs_sqrt * self.mes_raise_factor[base + mu]) * xs;
            }
        }
    }

    /// y += scale · ψ_ħ(η) x for nucleon mode amplitudes η (capped sectors).
    pub fn apply_nucleon_annihilate(&self, eta: &[C64], x: &[C64], y: &mut [C64], scale: C64) {
        let d_u = self.spec.d_u();
        let hs_sqrt = self.spec.hslash.sqrt();
        for s in 0..self.dim() {
            let xs = x[s];
            if xs.norm_sqr() == 0.0 {
                continue;
            }
            let base = s * d_u;
            for a in 0..d_u {
                let t = self.nuc_lower_target[base + a];
                if t == u32::MAX {
                    continue;
                }
                y[t as usize] +=
                    scale * eta[a].conj() * (hs_sqrt * self.nuc_lower_factor[base + a]) * xs;
            }
        }
    }

    /// y += scale · ψ*_ħ(η) x for nucleon mode amplitudes η (capped sectors).
    pub fn apply_nucleon_create(&self, eta: &[C64], x: &[C64], y: &mut [C64], scale: C64) {
        let d_u = self.spec.d_u();
        let hs_sqrt = self.spec.hslash.sqrt();
        for s in 0..self.dim() {
            let xs = x[s];
            if xs.norm_sqr() == 0.0 {
                continue;
            }
            let base = s * d_u;
            for a in 0..d_u {
                let t = self.nuc_raise_target[base + a];
                if t == u32::MAX {
                    continue;
                }
                y[t as usize] +=
                    scale * eta[a] * (hs_sqrt * self.nuc_raise_factor[base + a]) * xs;
            }
        }
    }

    /// Diagonal of N₁ (ħ × nucleon count).
    pub fn n1_diag(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|(n, _)| self.spec.hslash * n.iter().map(|&v| v as f64).sum::<f64>())
            .collect()
    }

    /// Diagonal of N₂ (ħ × meson count).
    pub fn n2_diag(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|(_, m)| self.spec.hslash * m.iter().map(|&v| v as f64).sum::<f64>())
            .collect()
    }

    /// Diagonal of the free Hamiltonian dΓ_ħ(−Δ+V) ⊗ 1 + 1 ⊗ dΓ_ħ(ω).
    pub fn h0_diag(&self) -> Vec<f64> {
        let e = &self.spec.nucleon_energies;
        let w = &self.spec.meson_omegas;
        self.states
            .iter()
            .map(|(n, m)| {
                let nuc: f64 = n.iter().zip(e).map(|(&o, &ev)| o as f64 * ev).sum();
                let mes: f64 = m.iter().zip(w).map(|(&o, &wv)| o as f64 * wv).sum();
                self.spec.hslash * (nuc + mes)
            })
            .collect()
    }

    /// Diagonal of dΓ_ħ^{(2)}(ω) alone.
    pub fn field_energy_diag(&self) -> Vec<f64> {
        let w = &self.spec.meson_omegas;
        self.states
            .iter()
            .map(|(_, m)| {
                self.spec.hslash
                    * m.iter().zip(w).map(|(&o, &wv)| o as f64 * wv).sum::<f64>()
            })
            .collect()
    }
}

/// Normalized coefficient vector over a basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub coeffs: Vec<C64>,
    /// True when the constructor normalized the vector.
    pub normalized: bool,
}

impl QuantumState {
    pub fn new_normalized(mut coeffs: Vec<C64>) -> Self {
        let n = linalg::norm(&coeffs, 1.0);
        if n > 0.0 {
            linalg::scale(&mut coeffs, 1.0 / n);
        }
        Self { coeffs, normalized: true }
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coeffs, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grids, ModelParams};

    fn small_spec(sector: NucleonSector, meson_cap: u8) -> FockSpec {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let mut rng = CounterRng::new(101);
        FockSpec::build(&grid, 3, &[1.2, 1.6], sector, meson_cap, 0.5, &mut rng).unwrap()
    }

    #[test]
    fn capped_dimension_matches_stars_and_bars() {
        let basis = FockBasis::new(small_spec(NucleonSector::Capped(2), 2)).unwrap();
        // nucleon occupations with 3 modes, total ≤ 2: C(2+3,3) = 10
        // meson occupations with 2 modes, total ≤ 2: C(2+2,2) = 6
        assert_eq!(basis.nucleon_block_count(), 10);
        assert_eq!(basis.meson_block_count(), 6);
        assert_eq!(basis.dim(), 60);
    }

    #[test]
    fn fixed_sector_dimension() {
        let basis = FockBasis::new(small_spec(NucleonSector::Fixed(2), 1)).unwrap();
        // exactly 2 quanta in 3 modes: C(2+3-1, 3-1) = 6; meson ≤ 1 in 2 modes: 3
        assert_eq!(basis.nucleon_block_count(), 6);
        assert_eq!(basis.meson_block_count(), 3);
        assert_eq!(basis.dim(), 18);
    }

    #[test]
    fn enumeration_is_lexicographic_nucleon_major() {
        let basis = FockBasis::new(small_spec(NucleonSector::Capped(1), 1)).unwrap();
        let first = &basis.states[0];
        assert!(first.0.iter().all(|&v| v == 0));
        assert!(first.1.iter().all(|&v| v == 0));
        for w in basis.states.windows(2) {
            let key = |s: &(Box<[u8]>, Box<[u8]>)| {
                let mut v: Vec<u8> = s.0.to_vec();
                v.extend_from_slice(&s.1);
                v
            };
            assert!(key(&w[0]) < key(&w[1]), "enumeration out of order");
        }
    }

    #[test]
    fn ladder_tables_respect_caps() {
        let basis = FockBasis::new(small_spec(NucleonSector::Capped(1), 1)).unwrap();
        // raising a meson at its cap has no target
        let full_mes = basis
            .states
            .iter()
            .position(|(_, m)| m.iter().map(|&v| v as u32).sum::<u32>() == 1)
            .unwrap();
        let m = basis.spec.meson_count();
        let occupied = basis.states[full_mes]
            .1
            .iter()
            .position(|&v| v == 1)
            .unwrap();
        assert_eq!(basis.mes_raise_target[full_mes * m + occupied], u32::MAX);
    }

    #[test]
    fn commutator_of_meson_ladders_is_hslash_below_cap() {
        let basis = FockBasis::new(small_spec(NucleonSector::Capped(1), 4)).unwrap();
        let dim = basis.dim();
        // vacuum state: [a, a*] expectation must be exactly ħ
        let mut x = vec![C64::new(0.0, 0.0); dim];
        x[0] = C64::new(1.0, 0.0);
        let eta = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let mut up = vec![C64::new(0.0, 0.0); dim];
        basis.apply_meson_create(&eta, &x, &mut up, C64::new(1.0, 0.0));
        let mut down_up = vec![C64::new(0.0, 0.0); dim];
        basis.apply_meson_annihilate(&eta, &up, &mut down_up, C64::new(1.0, 0.0));
        let mut down = vec![C64::new(0.0, 0.0); dim];
        basis.apply_meson_annihilate(&eta, &x, &mut down, C64::new(1.0, 0.0));
        let mut up_down = vec![C64::new(0.0, 0.0); dim];
        basis.apply_meson_create(&eta, &down, &mut up_down, C64::new(1.0, 0.0));
        let comm = linalg::inner(&x, &down_up, 1.0) - linalg::inner(&x, &up_down, 1.0);
        assert!((comm.re - basis.spec.hslash).abs() < 1e-14);
        assert!(comm.im.abs() < 1e-14);
    }

    #[test]
    fn coupling_tensor_is_symmetric() {
        let spec = small_spec(NucleonSector::Capped(1), 1);
        let d_u = spec.d_u();
        for block in &spec.coupling {
            for a in 0..d_u {
                for b in 0..d_u {
                    assert_eq!(block[a * d_u + b], block[b * d_u + a]);
                }
            }
        }
    }

    #[test]
    fn meson_projection_roundtrip() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let spec = small_spec(NucleonSector::Capped(1), 1);
        let mut f = vec![C64::new(0.0, 0.0); grid.len()];
        f[spec.meson_indices[0]] = C64::new(2.0, -1.0);
        let amps = spec.project_meson(&f);
        let back = spec.embed_meson(&amps, grid.len());
        assert!((back[spec.meson_indices[0]] - f[spec.meson_indices[0]]).norm() < 1e-14);
    }
}
