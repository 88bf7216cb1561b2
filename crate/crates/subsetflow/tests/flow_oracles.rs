//! Cross-checks the production integrator against a deliberately naive
//! reference: explicit first-order stepping with a step of 1e-6 times the
//! current separation, built from the velocity definition with no shared
//! code. The reference stops once the separation has decayed by 1e-3,
//! where its remaining travel is at most (n-1)/2 * 1e-3 * sep0, so the
//! production retraction must land within that envelope of it.

use subsetflow::flow::{retract_chain, retract_once, FlowParams};
use subsetflow::space::{hausdorff_distance, FiniteSubset};
use subsetflow::verify::sample;

fn pairwise_min_gap(pts: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let gap: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.min(gap);
        }
    }
    best
}

fn reference_velocity(pts: &[Vec<f64>], out: &mut [Vec<f64>]) {
    let d = pts[0].len();
    for v in out.iter_mut() {
        v.iter_mut().for_each(|c| *c = 0.0);
    }
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let mut norm = 0.0;
            for k in 0..d {
                let diff = pts[j][k] - pts[i][k];
                norm += diff * diff;
            }
            let norm = norm.sqrt();
            for k in 0..d {
                out[i][k] += (pts[j][k] - pts[i][k]) / norm;
            }
        }
    }
}

fn euler_collapse(mut pts: Vec<Vec<f64>>, decay: f64) -> Vec<Vec<f64>> {
    let sep0 = pairwise_min_gap(&pts);
    let mut vel = pts.clone();
    loop {
        let sep = pairwise_min_gap(&pts);
        if sep <= decay * sep0 {
            return pts;
        }
        let h = 1e-6 * sep;
        reference_velocity(&pts, &mut vel);
        for (p, v) in pts.iter_mut().zip(&vel) {
            for k in 0..p.len() {
                p[k] += h * v[k];
            }
        }
    }
}

fn cross_check(coords: Vec<Vec<f64>>) {
    let n = coords.len();
    let a = FiniteSubset::from_coords(coords.clone()).unwrap();
    let sep0 = pairwise_min_gap(&coords);
    let r = retract_once(&a, n, &FlowParams::default()).unwrap();
    let reference = FiniteSubset::from_coords(euler_collapse(coords, 1e-3)).unwrap();
    let gap = hausdorff_distance(&r.output, &reference).unwrap();
    let envelope = (n as f64 - 1.0) * 1e-3 * sep0;
    assert!(
        gap <= envelope,
        "reference disagrees: gap {gap}, envelope {envelope}"
    );
}

#[test]
fn hand_cases_match_the_reference() {
    cross_check(vec![vec![0.0], vec![1.0], vec![10.0]]);
    cross_check(vec![vec![0.0], vec![1.0], vec![2.0]]);
    cross_check(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.5, 3f64.sqrt() / 2.0],
    ]);
}

#[test]
fn random_configurations_match_the_reference() {
    for trial in 0..6u64 {
        let mut rng = sample::substream(2024, 900, trial);
        let n = 3 + (trial as usize) % 2;
        let d = 1 + (trial as usize) % 3;
        let config = sample::sample_config(&mut rng, n, d, 1.0, 0.05);
        let coords: Vec<Vec<f64>> = config.points().iter().map(|p| p.coords().to_vec()).collect();
        cross_check(coords);
    }
}

#[test]
fn chained_retraction_matches_the_reference_stagewise() {
    // Stage one collapses {0, 1, 10} onto {1, 9}; stage two is a two-body
    // midpoint merge at 5.
    let a = FiniteSubset::from_coords(vec![vec![0.0], vec![1.0], vec![10.0]]).unwrap();
    let chain = retract_chain(&a, 1, &FlowParams::default()).unwrap();
    assert_eq!(chain.output.len(), 1);
    assert!((chain.output.point(0)[0] - 5.0).abs() < 1e-6);

    let stage1 = euler_collapse(vec![vec![0.0], vec![1.0], vec![10.0]], 1e-3);
    // The collapsing pair straddles 1; the far point travels to 9.
    assert!(stage1.iter().all(|p| (p[0] - 1.0).abs() < 2e-3 || (p[0] - 9.0).abs() < 2e-3));
    let stage2 = euler_collapse(vec![vec![1.0], vec![9.0]], 1e-3);
    assert!(stage2.iter().all(|p| (p[0] - 5.0).abs() < 5e-3));
}
