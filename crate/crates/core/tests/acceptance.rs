//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::Command;

use minkkit::ellipsoid::{contact_points, john, largest_coplanar_group, lowner, RemarkBody};
use minkkit::linalg::{gaussian_matrix, gaussian_vector, rng};
use minkkit::operators::{
    ellipse_example_operator, ellipse_rotation, is_adjoint_abelian, is_isometry, lp_rotation_scan,
    phi_grid_from_tangents, rotation_branch_one,
};
use minkkit::reflect::{
    classify_composition, compose, euclidean_battery, fixed_hyperplane, left_reflection, Composition,
    LineSpec,
};
use minkkit::spectral::{isometry_normal_form, real_block_decomposition, reconstruct, Block};
use minkkit::symmetry::{group_report, GroupClass};
use minkkit::{LinearOperator, Matrix, NormModel, Sampling, Side, SipContext, Vector};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

fn diag2(a: f64, b: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b])
}

fn random_spd(seed: u64, n: usize) -> Matrix {
    let b = gaussian_matrix(&mut rng(seed), n);
    b.transpose() * &b + Matrix::identity(n, n)
}

// 1. s.i.p. axioms and the norm-derivative properties
fn sip_axioms() -> Outcome {
    let mut models: Vec<(String, SipContext)> = [1.5, 2.0, 3.0, 4.0]
        .iter()
        .map(|&p| (format!("l{p}"), SipContext::new(NormModel::lp(p, 3).unwrap())))
        .collect();
    models.push(("quadratic".into(), SipContext::new(NormModel::quadratic(random_spd(11, 3)).unwrap())));

    let mut worst = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_at = String::new();
    let sides = [Side::Plus, Side::Minus];
    let flip = |s: Side| if s == Side::Plus { Side::Minus } else { Side::Plus };
    for (name, ctx) in &models {
        let mut r = rng(0xa1);
        for _ in 0..200 {
            let (x, y, z) = (gaussian_vector(&mut r, 3), gaussian_vector(&mut r, 3), gaussian_vector(&mut r, 3));
            let alpha: f64 = 0.25 + gaussian_vector(&mut r, 1)[0].abs() * 2.0;
            let (nx, ny) = (ctx.norm(&x), ctx.norm(&y));
            let scale = (nx * ny).max(1.0);
            let sip = |u: &Vector, w: &Vector| ctx.sip(u, w).unwrap();
            let rho = |u: &Vector, w: &Vector, s: Side| ctx.rho(u, w, s);
            let mut res = vec![
                // s1 to s4
                (sip(&(&x + &y), &z) - sip(&x, &z) - sip(&y, &z)).abs(),
                (sip(&(&x * -alpha), &y) + alpha * sip(&x, &y)).abs(),
                (sip(&x, &(&y * alpha)) - alpha * sip(&x, &y)).abs(),
                if sip(&x, &x) > 0.0 { 0.0 } else { 1.0 },
                (sip(&x, &y).powi(2) - sip(&x, &x) * sip(&y, &y)).max(0.0) / scale,
            ];
            for s in sides {
                res.extend([
                    (rho(&x, &(&x * alpha + &y), s) - alpha * nx * nx - rho(&x, &y, s)).abs(),
                    (rho(&(&x * alpha), &y, s) - alpha * rho(&x, &y, s)).abs(),
                    (rho(&x, &(&y * alpha), s) - alpha * rho(&x, &y, s)).abs(),
                    (rho(&(&x * -alpha), &y, s) + alpha * rho(&x, &y, flip(s))).abs(),
                    (rho(&x, &(&y * -alpha), s) + alpha * rho(&x, &y, flip(s))).abs(),
                    (rho(&x, &x, s) - nx * nx).abs(),
                    (rho(&x, &y, s).abs() - nx * ny).max(0.0),
                ]);
                // continuity in the second slot: Lipschitz with constant ‖x‖
                let d = gaussian_vector(&mut r, 3) * 1e-6;
                res.push(((rho(&x, &(&y + &d), s) - rho(&x, &y, s)).abs() - nx * ctx.norm(&d)).max(0.0));
            }
            res.extend([
                (rho(&x, &y, Side::Minus) - rho(&x, &y, Side::Plus)).max(0.0),
                (rho(&x, &(&y + &z), Side::Plus) - rho(&x, &y, Side::Plus) - rho(&x, &z, Side::Plus)).max(0.0),
                (rho(&x, &y, Side::Minus) + rho(&x, &z, Side::Minus) - rho(&x, &(&y + &z), Side::Minus)).max(0.0),
                (rho(&x, &y, Side::Plus) - rho(&x, &y, Side::Minus)).abs(),
                (sip(&y, &x) - rho(&x, &y, Side::Plus)).abs(),
            ]);
            let m = res.iter().cloned().fold(0.0, f64::max) / scale;
            if m > worst {
                worst = m;
                worst_at = name.clone();
            }
            for s in sides {
                worst_fd = worst_fd.max((ctx.rho_fd(&x, &y, s) - rho(&x, &y, s)).abs() / scale);
            }
        }
    }
    outcome(
        worst <= 1e-7 && worst_fd <= 1e-6,
        format!("worst axiom residual {worst:.1e} ({worst_at}), finite-difference gap {worst_fd:.1e}"),
    )
}

// 2. the rotation of the ellipse (x/2)² + y² = 1
fn ellipse_example() -> Outcome {
    let (a, b) = (2.0, 1.0);
    let ctx = SipContext::new(NormModel::quadratic(diag2(1.0 / (a * a), 1.0 / (b * b))).unwrap());
    let (e, f) = (v2(1.0, 0.0), v2(0.0, 1.0));
    let sampling = Sampling::new(500, 0);
    let mut pass = true;
    let mut notes = Vec::new();
    for phi in [PI / 6.0, PI / 2.0] {
        let op = ellipse_example_operator(a, b, phi);
        let iso = is_isometry(&ctx, &op, sampling, 1e-9).unwrap();
        let aa = is_adjoint_abelian(&ctx, &op, sampling, 1e-9).unwrap();
        let w1 = ctx.sip(&op.apply(&e), &f).unwrap();
        let w2 = ctx.sip(&e, &op.apply(&f)).unwrap();
        let e1 = (w1 + a / b.powi(3) * phi.sin()).abs();
        let e2 = (w2 - b / a.powi(3) * phi.sin()).abs();
        let fixed = ellipse_rotation(a, b, phi);
        let fixed_iso = is_isometry(&ctx, &fixed, sampling, 1e-9).unwrap();
        pass &= iso.verdict && !aa.verdict && e1 <= 1e-10 && e2 <= 1e-10;
        notes.push(format!(
            "φ={phi:.4}: isometry {} (residual {:.2}), adjoint abelian {}, witness errors {e1:.0e}/{e2:.0e}; \
             F in the basis {{a·e, b·f}} is an isometry: {}",
            iso.verdict, iso.max_residual, aa.verdict, fixed_iso.verdict
        ));
    }
    outcome(pass, notes.join("; "))
}

// 3. sign functions of l_p rotations
fn lp_scan() -> Outcome {
    let ps: Vec<f64> = (0..21).map(|i| 1.1 + i as f64 * (10.0 - 1.1) / 20.0).collect();
    let tangents: Vec<f64> = (0..21).map(|j| 0.05 + j as f64 * 0.0425).collect();
    let table = lp_rotation_scan(&ps, &phi_grid_from_tangents(&tangents)).unwrap();
    let two = tangents
        .iter()
        .map(|&t| (rotation_branch_one(2.0, t) - 2.0 * t).abs())
        .fold(0.0, f64::max);
    let fifty = tangents
        .iter()
        .map(|&t| (rotation_branch_one(50.0, t) - t).abs())
        .fold(0.0, f64::max);
    let points = table.rows.len() / 2;
    outcome(
        two <= 1e-12 && fifty <= 0.05 && table.all_positive && points == 441,
        format!(
            "|f(2)−2tanφ| ≤ {two:.1e}, |f(50)−tanφ| ≤ {fifty:.3}, {points} points × 2 branches all positive: {} (minima {:.3e}, {:.3e})",
            table.all_positive,
            table.min_branch_one.unwrap(),
            table.min_branch_two.unwrap()
        ),
    )
}

// 4. normal forms
fn normal_forms() -> Outcome {
    let mut r = rng(0x4f);
    let mut round_trip = 0.0f64;
    for k in 0..100 {
        let n = 2 + k % 4;
        let a = LinearOperator::new(gaussian_matrix(&mut r, n)).unwrap();
        let nf = real_block_decomposition(&a, 1e-8).unwrap();
        let back = reconstruct(&nf).unwrap();
        round_trip = round_trip.max((back.matrix() - a.matrix()).amax() / a.matrix().amax());
    }

    let l4 = SipContext::new(NormModel::lp(4.0, 2).unwrap());
    let quarter = LinearOperator::from_rows(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
    let vnf = isometry_normal_form(&l4, &quarter, 1e-8).unwrap();
    let single = match vnf.normal_form.blocks.as_slice() {
        [Block::Plane2D { modulus, .. }] => (modulus - 1.0).abs() <= 1e-9,
        _ => false,
    };
    let mut pres = 0.0f64;
    let mut r = rng(0x50);
    for _ in 0..100 {
        let (x, y) = (gaussian_vector(&mut r, 2), gaussian_vector(&mut r, 2));
        let lhs = l4.sip(&quarter.apply(&x), &quarter.apply(&y)).unwrap();
        pres = pres.max((lhs - l4.sip(&x, &y).unwrap()).abs());
    }

    let l4_3 = SipContext::new(NormModel::lp(4.0, 3).unwrap());
    let perm = LinearOperator::from_rows(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let pnf = isometry_normal_form(&l4_3, &perm, 1e-8).unwrap();
    let signs = pnf
        .normal_form
        .blocks
        .iter()
        .all(|b| matches!(b, Block::Real1D { lambda, .. } if (lambda.abs() - 1.0).abs() <= 1e-9));
    let ortho = pnf.orthogonality.iter().map(|o| o.residual).fold(0.0, f64::max);

    outcome(
        round_trip <= 1e-8 && single && pres <= 1e-8 && signs && ortho <= 1e-9,
        format!(
            "round trip {round_trip:.1e}; quarter turn in l4 single unit block: {single}, s.i.p. preservation {pres:.1e}; \
             permutation ±1 blocks: {signs}, orthogonality {ortho:.1e}"
        ),
    )
}

// 5. left reflections
fn reflection_algebra() -> Outcome {
    let planes = [
        ("l4", SipContext::new(NormModel::lp(4.0, 2).unwrap())),
        ("quadratic", SipContext::new(NormModel::quadratic(Matrix::from_row_slice(2, 2, &[0.25, 0.1, 0.1, 1.0])).unwrap())),
    ];
    let mut worst = 0.0f64;
    let mut labels_ok = true;
    for (_, ctx) in &planes {
        for k in 0..90 {
            let theta = PI * k as f64 / 90.0;
            let dir = v2(theta.cos(), theta.sin());
            let g = LineSpec::line(v2(0.3, -0.2), dir.clone()).unwrap();
            let m = left_reflection(ctx, &g, 1e-10).unwrap();
            let twice = m.then(&m);
            worst = worst.max((twice.linear - Matrix::identity(2, 2)).amax()).max(twice.t.amax());
            worst = worst.max((m.linear.determinant() + 1.0).abs());
            // the fixed set is exactly G
            match fixed_hyperplane(&m, 1e-9) {
                Some((fixed, _)) => {
                    worst = worst.max(g.distance(&fixed.point));
                    let d = &fixed.directions[0];
                    worst = worst.max((d[0] * dir[1] - d[1] * dir[0]).abs() / d.norm());
                }
                None => worst = f64::INFINITY,
            }
            let g2 = LineSpec::line(v2(-0.5, 0.9), dir.clone()).unwrap();
            let g3 = LineSpec::line(v2(1.2, 0.4), dir.clone()).unwrap();
            let m2 = left_reflection(ctx, &g2, 1e-10).unwrap();
            let m3 = left_reflection(ctx, &g3, 1e-10).unwrap();
            let two = compose(&[m.clone(), m2.clone()]).unwrap();
            let three = compose(&[m, m2, m3]).unwrap();
            labels_ok &= classify_composition(ctx, &two, 1e-8).unwrap() == Composition::Translation;
            labels_ok &= classify_composition(ctx, &three, 1e-8).unwrap() == Composition::LeftReflection;
            if let Some((fixed, _)) = fixed_hyperplane(&three, 1e-9) {
                let d = &fixed.directions[0];
                worst = worst.max((d[0] * dir[1] - d[1] * dir[0]).abs() / d.norm());
            }
        }
    }
    let quad = euclidean_battery(&planes[1].1, 20, 1e-7).unwrap();
    let l4 = euclidean_battery(&planes[0].1, 20, 1e-7).unwrap();
    let failing: Vec<_> = l4.criteria().into_iter().filter(|c| !c.all_passed()).collect();
    let stored = !failing.is_empty() && failing.iter().all(|c| !c.witness_angles.is_empty());
    outcome(
        worst <= 1e-8 && labels_ok && quad.all_passed() && stored,
        format!(
            "worst algebra residual {worst:.1e}, composition labels correct: {labels_ok}; battery passes on quadratic: {}; \
             l4 fails {} criteria, each with a stored counterexample: {stored}",
            quad.all_passed(),
            failing.len()
        ),
    )
}

// 6. ellipsoids
fn ellipsoids() -> Outcome {
    let square: Vec<Vector> = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(x, y)| v2(x, y))
        .collect();
    let lw = lowner(&square, 1e-9).unwrap();
    let sq_err = lw.semi_axes().iter().map(|r| (r - 2f64.sqrt()).abs()).fold(0.0, f64::max);

    let jc = john(&NormModel::named_polytope("cross3").unwrap(), 1e-9).unwrap();
    let cross_err = jc.semi_axes().iter().map(|r| (r - 1.0 / 3f64.sqrt()).abs()).fold(0.0, f64::max);

    let mut equi = 0.0f64;
    for seed in 0..20 {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, 3) + Matrix::identity(3, 3) * 3.0;
        let b = gaussian_vector(&mut r, 3);
        let pts: Vec<Vector> = (0..40).map(|_| gaussian_vector(&mut r, 3)).collect();
        let mapped: Vec<Vector> = pts.iter().map(|p| &a * p + &b).collect();
        let e = lowner(&pts, 1e-9).unwrap().transform(&a, &b).unwrap();
        let f = lowner(&mapped, 1e-9).unwrap();
        equi = equi
            .max((e.shape - &f.shape).amax() / f.shape.amax())
            .max((e.center - &f.center).amax());
    }

    let body = RemarkBody::new(16, 0.05).unwrap();
    let jr = john(&body, 1e-7).unwrap();
    let ball = (&jr.shape - Matrix::identity(3, 3)).amax();
    let contacts = contact_points(&body, &jr, 4096, 1e-3);
    let coplanar = largest_coplanar_group(&contacts, &jr, 1e-6).map_or(0, |g| g.count);

    outcome(
        sq_err <= 1e-5 && cross_err <= 1e-4 && equi <= 1e-5 && ball <= 0.01 && coplanar >= 64,
        format!(
            "square Löwner radius error {sq_err:.1e}, octahedron John radius error {cross_err:.1e}, \
             equivariance {equi:.1e}, collared ball: John distance from ball {ball:.1e}, {coplanar} coplanar contacts"
        ),
    )
}

// 7. isometry groups
fn symmetry() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, order, class) in [
        ("square", 8, Some(GroupClass::Dihedral(4))),
        ("hexagon", 12, Some(GroupClass::Dihedral(6))),
        ("cube3", 48, None),
        ("cross3", 48, None),
    ] {
        let rep = group_report(&NormModel::named_polytope(name).unwrap(), 1e-9).unwrap();
        let group = rep.point_group.as_ref().unwrap();
        let ok = rep.order == Some(order)
            && group.closure_verified
            && class.is_none_or(|c| c == rep.classification)
            && order % 2 == 0;
        pass &= ok;
        notes.push(format!("{name} {} order {}", rep.classification, group.order));
    }
    for seed in [1, 2] {
        let rep = group_report(&NormModel::quadratic(random_spd(seed, 3)).unwrap(), 1e-9).unwrap();
        pass &= rep.classification == GroupClass::InfiniteDetected && !rep.finite;
    }
    let q2 = group_report(&NormModel::quadratic(diag2(1.0, 4.0)).unwrap(), 1e-9).unwrap();
    pass &= q2.classification == GroupClass::InfiniteDetected;
    notes.push("quadratic models infinite-detected".into());
    outcome(pass, notes.join(", "))
}

// 8. byte-identical JSON from the command-line tool
fn determinism() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["lp-scan", "--p", "1.1:0.1:10", "--tanphi", "0.05:0.05:0.95"],
        vec!["check", "isometry", "--model", "lp:4", "--op", "[[1,1],[0,1]]", "--seed", "7"],
        vec!["check", "adjoint-abelian", "--model", "quadratic:[[0.25,0],[0,1]]", "--op", "[[0,2],[-0.5,0]]"],
        vec!["normal-form", "isometry", "--model", "lp:4:3", "--op", "[[0,1,0],[1,0,0],[0,0,1]]"],
        vec!["reflect", "battery", "--model", "lp:4", "--trials", "6"],
        vec!["ellipsoid", "john", "--model", "polytopal:cross3"],
        vec!["symmetry", "group", "--model", "polytopal:cube3"],
        vec!["sip", "--model", "lp:3:3", "--u", "[1,2,3]", "--v", "[-1,0.5,2]"],
    ];
    let exe = env!("CARGO_BIN_EXE_minkkit");
    let run = |args: &[&str], threads: &str| {
        Command::new(exe)
            .args(args)
            .env("MINKKIT_THREADS", threads)
            .output()
            .expect("binary runs")
    };
    let mut identical = 0;
    let mut bytes = 0;
    for args in &commands {
        let first = run(args, "1");
        let second = run(args, "4");
        if first.stdout == second.stdout && first.status.code() == second.status.code() && !first.stdout.is_empty() {
            identical += 1;
        }
        bytes += first.stdout.len();
    }
    outcome(
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across runs ({bytes} bytes)", commands.len()),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("s.i.p. axiom suite", sip_axioms),
        ("ellipse rotation example", ellipse_example),
        ("l_p rotation scan", lp_scan),
        ("normal forms", normal_forms),
        ("left-reflection algebra", reflection_algebra),
        ("ellipsoids", ellipsoids),
        ("symmetry groups", symmetry),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<26} {}  [{:.1}s] {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
