use coalg_core::homology::{euler_form, ext_fd, minimalize, standard_resolution};
use coalg_core::quiver::enumerate_paths;
use coalg_core::repmod::{isomorphic, linear_dual, parse_rep, random_rep, render_rep, simple, twist};
use coalg_core::{FieldSpec, Matrix, Quiver, Rep, Side, VertexTwist};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quivers() -> Vec<Quiver> {
    vec![
        Quiver::loop_quiver(),
        Quiver::cycle(2),
        Quiver::cycle(3),
        Quiver::kronecker(),
        Quiver::from_edges(3, &[("a", 0, 1), ("b", 1, 2), ("c", 0, 2)]).unwrap(),
    ]
}

const FIELDS: [FieldSpec; 3] = [FieldSpec::Rationals, FieldSpec::Prime(2), FieldSpec::Prime(7)];

fn rep_from_seed(seed: u64, qi: usize, fi: usize) -> Rep {
    let q = &quivers()[qi];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..q.vertex_count()).map(|_| rng.random_range(0..=2)).collect();
    random_rep(q, Side::Left, FIELDS[fi], &dims, 0.5, &mut rng)
}

fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

/// Rank over Q as the size of the largest nonvanishing minor.
fn minor_rank(a: &[Vec<i64>]) -> usize {
    let (r, c) = (a.len(), a[0].len());
    (1..=r.min(c))
        .rev()
        .find(|&k| {
            subsets(r, k).iter().any(|rows| {
                subsets(c, k).iter().any(|cols| {
                    let m: Vec<Vec<i128>> = rows
                        .iter()
                        .map(|&i| cols.iter().map(|&j| a[i][j] as i128).collect())
                        .collect();
                    det(&m) != 0
                })
            })
        })
        .unwrap_or(0)
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..=3, c), r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_matches_minor_oracle(rows in matrix_strategy()) {
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        let m = Matrix::from_i64(FieldSpec::Rationals, &refs);
        prop_assert_eq!(m.rank(), minor_rank(&rows));
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn kernel_and_cokernel_laws(rows in matrix_strategy(), fi in 0usize..3) {
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        let m = Matrix::from_i64(FIELDS[fi], &refs);
        let k = m.kernel_basis();
        prop_assert!(m.mul(&k).is_zero());
        prop_assert_eq!(k.cols(), m.cols() - m.rank());
        prop_assert_eq!(k.rank(), k.cols());
        let (p, l) = m.cokernel_section();
        prop_assert!(p.mul(&m).is_zero());
        prop_assert_eq!(p.mul(&l), Matrix::identity(FIELDS[fi], p.rows()));
        prop_assert_eq!(p.rows(), m.rows() - m.rank());
    }

    #[test]
    fn solve_recovers_consistent_systems(rows in matrix_strategy(), x in prop::collection::vec(-3i64..=3, 4)) {
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        let m = Matrix::from_i64(FieldSpec::Rationals, &refs);
        let xs: Vec<&[i64]> = x[..m.cols()].iter().map(std::slice::from_ref).collect();
        let b = m.mul(&Matrix::from_i64(FieldSpec::Rationals, &xs));
        let sol = m.solve(&b).expect("consistent");
        prop_assert_eq!(m.mul(&sol), b);
    }

    #[test]
    fn path_counts_match_enumeration(qi in 0usize..5, len in 0usize..7) {
        let q = &quivers()[qi];
        let counts = q.path_counts(len);
        let table = enumerate_paths(q, len);
        for i in 0..q.vertex_count() {
            for j in 0..q.vertex_count() {
                prop_assert_eq!(counts[len][i][j] as usize, table.between(j, i, len).len());
            }
        }
    }

    #[test]
    fn minimal_betti_numbers_are_ext_into_simples(seed in any::<u64>(), qi in 0usize..5, fi in 0usize..3) {
        let m = rep_from_seed(seed, qi, fi);
        let q = m.quiver().clone();
        let (b1, b0) = minimalize(&standard_resolution(&m, 8).unwrap()).betti();
        for v in 0..q.vertex_count() {
            let s = simple(&q, v, Side::Left, FIELDS[fi]);
            prop_assert_eq!(b0[v], ext_fd(&m, &s, 0).unwrap().dim);
            prop_assert_eq!(b1[v], ext_fd(&m, &s, 1).unwrap().dim);
        }
    }

    #[test]
    fn euler_form_over_every_field(s1 in any::<u64>(), s2 in any::<u64>(), qi in 0usize..5, fi in 0usize..3) {
        let (m, n) = (rep_from_seed(s1, qi, fi), rep_from_seed(s2, qi, fi));
        let chi = ext_fd(&m, &n, 0).unwrap().dim as i64 - ext_fd(&m, &n, 1).unwrap().dim as i64;
        prop_assert_eq!(chi, euler_form(&m, &n));
    }

    #[test]
    fn text_format_roundtrip(seed in any::<u64>(), qi in 0usize..5, fi in 0usize..3) {
        let m = rep_from_seed(seed, qi, fi);
        let back = parse_rep(m.quiver(), FIELDS[fi], &render_rep(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn double_dual_is_identity(seed in any::<u64>(), qi in 0usize..5, fi in 0usize..3) {
        let m = rep_from_seed(seed, qi, fi);
        let d = linear_dual(&m);
        prop_assert_eq!(d.side(), Side::Right);
        prop_assert_eq!(linear_dual(&d), m);
    }

    #[test]
    fn change_of_basis_is_isomorphic(seed in any::<u64>(), qi in 0usize..5) {
        let m = rep_from_seed(seed, qi, 0);
        let f = FieldSpec::Rationals;
        // unipotent upper-triangular basis change
        let g: Vec<Matrix> = m
            .dims()
            .iter()
            .map(|&d| {
                let mut x = Matrix::identity(f, d);
                for i in 0..d {
                    for j in i + 1..d {
                        x.set(i, j, f.from_i64((seed % 5) as i64 - 2));
                    }
                }
                x
            })
            .collect();
        let n = m.change_basis(&g).unwrap();
        prop_assert!(isomorphic(&m, &n, seed).unwrap());
    }

    #[test]
    fn twist_inverse_roundtrip(seed in any::<u64>(), k in 2usize..=4) {
        let q = Quiver::cycle(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims: Vec<usize> = (0..k).map(|_| rng.random_range(0..=2)).collect();
        let m = random_rep(&q, Side::Left, FieldSpec::Rationals, &dims, 0.5, &mut rng);
        let shift = rng.random_range(0..k);
        let perm: Vec<usize> = (0..k).map(|v| (v + shift) % k).collect();
        let t = VertexTwist::from_vertex_perm(&q, &perm, FieldSpec::Rationals).unwrap();
        let tm = twist(&m, &t).unwrap();
        for v in 0..k {
            prop_assert_eq!(tm.dims()[v], m.dims()[perm[v]]);
        }
        prop_assert_eq!(twist(&tm, &t.inverse()).unwrap(), m);
    }
}
