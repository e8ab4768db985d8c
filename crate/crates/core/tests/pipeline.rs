use core::f64::consts::FRAC_PI_4;

use bent_core::fock::{hermitian_eigenvalues, FockCutoff};
use bent_core::gerschgorin::gerschgorin_discs;
use bent_core::hankel::HankelFamily;
use bent_core::partial_transpose::{
    block_decompose, coupled_sectors, partial_transpose_b, sector_min_eigenvalues, sectors_are_ppt, BlockIndex,
};
use bent_core::states::{
    beam_split_diagonal_state, build_mixture, MixtureSpec, PhotonDistribution, SqueezingParameter,
};
use num_complex::Complex64;

fn min_and_cholesky(spec: &MixtureSpec) -> (f64, bool, f64) {
    let pt = partial_transpose_b(&build_mixture(spec).unwrap());
    let sectors = coupled_sectors(&pt, 1e-12);
    let min = sector_min_eigenvalues(&sectors, 1e-10)
        .unwrap()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * sectors.largest_diagonal();
    (min, sectors_are_ppt(&sectors, tol), tol)
}

#[test]
fn eigenvalue_and_cholesky_checks_agree() {
    let spec = MixtureSpec::worked_example(40).unwrap();
    let (min, chol, tol) = min_and_cholesky(&spec);
    assert!(min >= -tol && chol, "min {min}");

    let strong = spec.with_omega(SqueezingParameter::real(0.9).unwrap());
    let (min, chol, tol) = min_and_cholesky(&strong);
    assert!(min < -tol && !chol, "min {min}");
}

#[test]
fn low_cutoff_truncation_breaks_ppt() {
    // The cutoff edge blocks lose entries and go negative; the deficit shrinks about as 2^-n_max.
    let mut last = f64::NEG_INFINITY;
    for n in [12, 16, 20, 24] {
        let (min, chol, _) = min_and_cholesky(&MixtureSpec::worked_example(n).unwrap());
        assert!(!chol && min < 0.0);
        assert!(min > last, "n_max {n}: {min} after {last}");
        last = min;
    }
}

#[test]
fn hankel_products_match_photon_added_blocks() {
    let k = FockCutoff::new(24).unwrap();
    let d = PhotonDistribution::photon_added_thermal(1.5, k).unwrap();
    let rho = beam_split_diagonal_state(&d, FRAC_PI_4, k).unwrap();
    let blocks = block_decompose(&partial_transpose_b(&rho), 1e-12).unwrap();
    let order = 8;
    let family = HankelFamily::build(&d, 0..=3, order).unwrap();
    for i in 0..=3usize {
        let product = family.block(i).unwrap();
        let m = &blocks.blocks[&BlockIndex(i as i32)].matrix;
        for r in 0..order {
            for c in 0..order {
                assert!((m[(r, c)] - Complex64::new(product[(r, c)], 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn mixture_block_spectrum_lies_in_its_discs() {
    let spec = MixtureSpec::worked_example(16).unwrap();
    let pt = partial_transpose_b(&build_mixture(&spec).unwrap());
    let blocks = block_decompose(&pt, f64::INFINITY).unwrap();
    for delta in [-2, 0, 1] {
        let m = &blocks.blocks[&BlockIndex(delta)].matrix;
        let report = gerschgorin_discs(m, None).unwrap();
        for e in hermitian_eigenvalues(m, 1e-10).unwrap() {
            assert!(report.contains(e, 1e-12), "delta {delta}: {e}");
        }
    }
}
