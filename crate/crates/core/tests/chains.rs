use parashear::lie::{bracket, chain_basis, gr_invariant, sl2_basis, sl2_sum_basis, sln_basis};
use parashear::SquareMatrix;

fn check_chains(w: &SquareMatrix, ambient: &[SquareMatrix]) -> Vec<usize> {
    let cb = chain_basis(w, ambient).unwrap();
    for chain in &cb.chains {
        assert!(bracket(w, &chain[0]).unwrap().frobenius() < 1e-12);
        for i in 1..chain.len() {
            let r = &bracket(w, &chain[i]).unwrap() - &chain[i - 1];
            assert!(r.frobenius() < 1e-12);
        }
    }
    let total: usize = cb.chains.iter().map(|c| c.len()).sum();
    assert_eq!(total, ambient.len());
    let mut lens: Vec<usize> = cb.chains.iter().map(|c| c.len()).collect();
    lens.sort_unstable();
    lens
}

#[test]
fn chain_lengths_match_jordan_blocks() {
    let u = SquareMatrix::unit(2, 0, 1);
    assert_eq!(check_chains(&u, &sl2_basis()), vec![3]);

    let w3 = &SquareMatrix::unit(3, 0, 1) + &SquareMatrix::unit(3, 1, 2);
    // ad of a regular nilpotent in sl3 has blocks 3 and 5
    assert_eq!(check_chains(&w3, &sln_basis(3)), vec![3, 5]);

    let z = SquareMatrix::zeros(2);
    let w = SquareMatrix::block_diag(&[&u, &z]).unwrap();
    assert_eq!(check_chains(&w, &sl2_sum_basis()), vec![1, 1, 1, 3]);

    let w = SquareMatrix::block_diag(&[&u, &u]).unwrap();
    assert_eq!(check_chains(&w, &sl2_sum_basis()), vec![3, 3]);
}

#[test]
fn gr_counts_pairs_within_chains() {
    let u = SquareMatrix::unit(2, 0, 1);
    let w3 = &SquareMatrix::unit(3, 0, 1) + &SquareMatrix::unit(3, 1, 2);
    let uu = SquareMatrix::block_diag(&[&u, &u]).unwrap();
    let gr = |w: &SquareMatrix, b: &[SquareMatrix]| gr_invariant(&chain_basis(w, b).unwrap());
    assert_eq!(gr(&u, &sl2_basis()), 3);
    assert_eq!(gr(&w3, &sln_basis(3)), 13);
    assert_eq!(gr(&uu, &sl2_sum_basis()), 6);
}

#[test]
fn semisimple_generator_rejected() {
    let x = SquareMatrix::diag(&[1.0, -1.0]);
    assert!(matches!(chain_basis(&x, &sl2_basis()), Err(parashear::Error::NotNilpotent)));
}

#[test]
fn zero_generator_gives_trivial_chains() {
    assert_eq!(check_chains(&SquareMatrix::zeros(2), &sl2_basis()), vec![1, 1, 1]);
}
