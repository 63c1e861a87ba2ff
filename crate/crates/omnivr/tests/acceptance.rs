//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use omnivr::core::metrics::{
    band_weights, latitude_weights, ws_psnr_weighted, ws_ssim, ws_ssim_weighted,
};
use omnivr::core::{
    downsample_bicubic, ws_psnr, Image, Interpolation, MobiusMatrix, SpherePoint, SphericalCoord,
    UserCommand,
};
use omnivr::dataset::{self, DatasetConfig, Mode};
use omnivr::io::load_png;
use omnivr::parallel;
use omnivr::server::{serve_listener, AppState, Panorama};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

const NATURAL: [&str; 5] = [
    "natural_0_astronaut.png",
    "natural_1_coffee.png",
    "natural_2_rocket.png",
    "natural_3_chelsea.png",
    "natural_4_hubble_deep_field.png",
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn wrapped_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn projection_round_trip() -> Outcome {
    let mut r = rng(1);
    let lim = FRAC_PI_2 - 1e-3;
    let coords: Vec<SphericalCoord> = (0..100_000)
        .map(|_| SphericalCoord::new(r.random_range(-PI..PI), r.random_range(-lim..=lim)))
        .collect();
    let t = Instant::now();
    let mut max_err: f64 = 0.0;
    for c in &coords {
        let back = match c.to_sphere().stereographic().to_sphere().to_spherical() {
            Ok(b) => b,
            Err(e) => return outcome(false, format!("{c:?}: {e}")),
        };
        max_err = max_err
            .max((back.phi - c.phi).abs())
            .max(wrapped_diff(back.theta, c.theta));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        max_err < 1e-9 && secs < 1.0,
        format!(
            "1e5 points, max coordinate error {max_err:.2e} rad, {:.1} ms",
            secs * 1e3
        ),
    )
}

/// Random matrix with unit determinant and Frobenius norm at most 10.
fn random_matrix(r: &mut ChaCha8Rng) -> MobiusMatrix {
    loop {
        let mut z = || Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let (a, b, c, d) = (z(), z(), z(), z());
        let det = a * d - b * c;
        if det.norm() < 1e-3 {
            continue;
        }
        let k = det.sqrt().inv();
        let m = MobiusMatrix::new(a * k, b * k, c * k, d * k).unwrap();
        let frob: f64 = m.entries().iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if frob <= 10.0 {
            return m;
        }
    }
}

fn random_point(r: &mut ChaCha8Rng) -> SpherePoint {
    let z: f64 = r.random_range(-1.0..=1.0);
    let t: f64 = r.random_range(0.0..TAU);
    let s = (1.0 - z * z).sqrt();
    SpherePoint::new(s * t.cos(), s * t.sin(), z)
}

/// Chordal distance, which stays bounded across the point at infinity.
fn chord(a: SpherePoint, b: SpherePoint) -> f64 {
    a.add(b.scale(-1.0)).norm()
}

fn tangent_frame(p: SpherePoint) -> (SpherePoint, SpherePoint) {
    let helper = if p.z.abs() < 0.9 {
        SpherePoint::NORTH_POLE
    } else {
        SpherePoint::new(1.0, 0.0, 0.0)
    };
    let e1 = helper.cross(p).normalized().unwrap();
    (e1, p.cross(e1))
}

/// Ratio of the singular values of the sphere map's Jacobian at `p`.
fn jacobian_ratio(m: &MobiusMatrix, p: SpherePoint) -> f64 {
    let h = 1e-6;
    let (e1, e2) = tangent_frame(p);
    let q = m.apply_sphere(p);
    let (f1, f2) = tangent_frame(q);
    let step = |e: SpherePoint, s: f64| p.scale((s).cos()).add(e.scale((s).sin()));
    let col = |e: SpherePoint| {
        let d = m
            .apply_sphere(step(e, h))
            .add(m.apply_sphere(step(e, -h)).scale(-1.0))
            .scale(0.5 / h);
        (d.dot(f1), d.dot(f2))
    };
    let (a, c) = col(e1);
    let (b, d) = col(e2);
    // Singular values of [[a, b], [c, d]].
    let s1 = ((a + d).powi(2) + (c - b).powi(2)).sqrt();
    let s2 = ((a - d).powi(2) + (c + b).powi(2)).sqrt();
    let (hi, lo) = ((s1 + s2) / 2.0, (s1 - s2).abs() / 2.0);
    hi / lo
}

fn mobius_group_suite() -> Outcome {
    let mut r = rng(2);
    let t = Instant::now();
    let (mut comp, mut inv, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (m1, m2) = (random_matrix(&mut r), random_matrix(&mut r));
        let p = random_point(&mut r);
        let lambda = Complex64::from_polar(r.random_range(0.1..10.0), r.random_range(0.0..TAU));
        comp = comp.max(chord(
            m1.compose(&m2).apply_sphere(p),
            m1.apply_sphere(m2.apply_sphere(p)),
        ));
        inv = inv.max(chord(m1.inverse().apply_sphere(m1.apply_sphere(p)), p));
        scale = scale.max(chord(m1.scaled(lambda).apply_sphere(p), m1.apply_sphere(p)));
    }
    let mut conf: f64 = 0.0;
    for _ in 0..1_000 {
        let m = random_matrix(&mut r);
        let p = random_point(&mut r);
        conf = conf.max(jacobian_ratio(&m, p) - 1.0);
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = comp < 1e-9 && inv < 1e-9 && scale < 1e-9 && conf < 1e-3 && secs < 5.0;
    outcome(
        pass,
        format!(
            "compose {comp:.1e}, inverse {inv:.1e}, scale {scale:.1e}, conformality |σ1/σ2-1| {conf:.1e}, {:.0} ms",
            secs * 1e3
        ),
    )
}

fn roll_columns(img: &Image, k: usize) -> Image {
    let w = img.width();
    Image::from_fn(img.height(), w, img.channels(), |r, c, ch| {
        img.get(r, (c + w - k % w) % w, ch)
    })
}

fn circular_shift_exactness() -> Outcome {
    let mut r = rng(3);
    let img = Image::from_fn(64, 128, 3, |_, _, _| r.random_range(0.0..1.0));
    let mut failures = Vec::new();
    for k in [1usize, 7, 64] {
        let cmd = UserCommand::new(TAU * k as f64 / 128.0, 0.0, 1.0).unwrap();
        let oracle = roll_columns(&img, k);
        for interp in Interpolation::ALL {
            let out = omnivr::core::transform_image(&img, &cmd, 1, interp).unwrap();
            if out != oracle {
                failures.push(format!("k={k} {interp}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "k in {1, 7, 64} x {slerp, bicubic, nearest}: bit-exact".to_owned()
        } else {
            format!("mismatch: {}", failures.join(", "))
        },
    )
}

fn identity_exactness() -> Outcome {
    let mut failures = Vec::new();
    for name in &NATURAL[..3] {
        let img = load_png(fixture(name)).unwrap();
        for interp in Interpolation::ALL {
            let out =
                omnivr::core::transform_image(&img, &UserCommand::IDENTITY, 1, interp).unwrap();
            if out != img {
                failures.push(format!("{name} {interp}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "3 fixtures x 3 interpolators: bit-identical".to_owned()
        } else {
            format!("mismatch: {}", failures.join(", "))
        },
    )
}

/// Smooth function of the unit vector, so it has no seam or pole artefacts.
fn smooth_panorama(h: usize, w: usize) -> Image {
    Image::from_fn(h, w, 3, |r, c, ch| {
        let p = omnivr::core::geometry::pixel_center(h, w, r, c).to_sphere();
        let k = ch as f64;
        0.5 + 0.15 * p.x
            + 0.1 * (p.y * (1.0 + k)).sin() * p.z
            + 0.1 * (6.0 * p.x + k).cos() * p.y
            + 0.1 * (9.0 * p.z).sin() * (7.0 * p.y).cos()
    })
}

fn zoom_round_trip() -> Outcome {
    let img = smooth_panorama(256, 512);
    let there = UserCommand::new(0.0, 0.0, 1.5).unwrap();
    let back = UserCommand::new(0.0, 0.0, 1.0 / 1.5).unwrap();
    let zoomed = parallel::transform_image(&img, &there, 1, Interpolation::SLERP).unwrap();
    let restored = parallel::transform_image(&zoomed, &back, 1, Interpolation::SLERP).unwrap();
    let band = band_weights(256, PI / 3.0);
    let psnr = ws_psnr_weighted(&img, &restored, &band).unwrap();
    outcome(
        psnr >= 40.0,
        format!("WS-PSNR in |φ| <= 60°: {psnr:.2} dB (need >= 40)"),
    )
}

fn baseline_sanity() -> Outcome {
    let t = Instant::now();
    let rotations = [(0.7, 0.0), (0.0, 0.5), (2.1, -0.9)];
    let zooms = [(0.4, 0.3, 1.5), (-1.2, -0.2, 2.0)];
    let mut worst_gap: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for name in NATURAL {
        let hr = load_png(fixture(name)).unwrap();
        let lr = downsample_bicubic(&hr, 8).unwrap();
        let up = parallel::upsample_bicubic(&lr, 8).unwrap();
        for (beta, gamma) in rotations {
            let cmd = UserCommand::new(beta, gamma, 1.0).unwrap();
            let gt = parallel::transform_image(&hr, &cmd, 1, Interpolation::SLERP).unwrap();
            let s = parallel::transform_image(&up, &cmd, 1, Interpolation::SLERP).unwrap();
            let b = parallel::transform_image(&up, &cmd, 1, Interpolation::Bicubic).unwrap();
            let gap = (ws_psnr(&gt, &s).unwrap() - ws_psnr(&gt, &b).unwrap()).abs();
            worst_gap = worst_gap.max(gap);
            if gap > 0.5 {
                failures.push(format!("{name} rotation ({beta}, {gamma}) gap {gap:.3} dB"));
            }
        }
        for (beta, gamma, s) in zooms {
            let cmd = UserCommand::new(beta, gamma, s).unwrap();
            let gt = parallel::transform_image(&hr, &cmd, 1, Interpolation::SLERP).unwrap();
            let sl = parallel::transform_image(&up, &cmd, 1, Interpolation::SLERP).unwrap();
            let nn = parallel::transform_image(&up, &cmd, 1, Interpolation::Nearest).unwrap();
            let margin = ws_ssim(&gt, &sl).unwrap() - ws_ssim(&gt, &nn).unwrap();
            min_margin = min_margin.min(margin);
            if margin <= 0.0 {
                failures.push(format!(
                    "{name} zoom s={s}: slerp does not beat nearest ({margin:.4})"
                ));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 30.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    outcome(
        failures.is_empty(),
        format!(
            "5 fixtures: max |slerp - bicubic| rotation gap {worst_gap:.3} dB, min WS-SSIM margin over nearest {min_margin:.4}, {secs:.1} s{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn metrics_cases() -> Outcome {
    let mut r = rng(4);
    let a = Image::from_fn(64, 128, 3, |_, _, _| r.random_range(0.0..0.9));
    let mut data = a.as_slice().to_vec();
    for v in &mut data {
        *v += 10.0 / 255.0;
    }
    let b = Image::from_vec(64, 128, 3, data).unwrap();
    let expected = 20.0 * 25.5f64.log10();
    let psnr = ws_psnr(&a, &b).unwrap();
    let offset_err = (psnr - expected).abs();
    let self_ssim = ws_ssim(&a, &a).unwrap();
    let c = Image::from_fn(64, 128, 3, |_, _, _| r.random_range(0.0..1.0));
    let w = latitude_weights(64, 128).unwrap();
    let w3: Vec<f64> = w.iter().map(|x| x * 3.7).collect();
    let psnr_gap =
        (ws_psnr_weighted(&a, &c, &w).unwrap() - ws_psnr_weighted(&a, &c, &w3).unwrap()).abs();
    let ssim_gap =
        (ws_ssim_weighted(&a, &c, &w).unwrap() - ws_ssim_weighted(&a, &c, &w3).unwrap()).abs();
    outcome(
        offset_err < 1e-6 && self_ssim == 1.0 && psnr_gap < 1e-9 && ssim_gap < 1e-9,
        format!(
            "offset 10/255: {psnr:.6} dB (analytic {expected:.6}), ws_ssim(a,a) = {self_ssim}, weight-scale gaps {psnr_gap:.1e} / {ssim_gap:.1e}"
        ),
    )
}

fn read_tree(dir: &Path, manifest: &dataset::Manifest) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![(
        "manifest.json".to_owned(),
        std::fs::read(dir.join("manifest.json")).unwrap(),
    )];
    for rec in &manifest.records {
        for rel in [&rec.lr_path, &rec.hr_transformed_path] {
            files.push((rel.clone(), std::fs::read(dir.join(rel)).unwrap()));
        }
    }
    files
}

fn dataset_determinism() -> Outcome {
    let inputs: Vec<PathBuf> = NATURAL.iter().map(|n| fixture(n)).collect();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = DatasetConfig {
        scale: 8,
        seed: 7,
        mode: Mode::TrainRandom,
    };
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let m = dataset::generate(&inputs, &dir, &cfg).unwrap();
        trees.push(read_tree(&dir, &m));
    }
    let identical = trees[0] == trees[1] && trees[0].len() == 11;
    let big = Image::from_fn(1024, 2048, 1, |r, c, _| ((r / 64 + c / 64) % 2) as f64);
    let (manifest, samples) = dataset::generate_samples(&[("big".into(), big)], &cfg).unwrap();
    let lr = (samples[0].lr.height(), samples[0].lr.width());
    let rec = &manifest.records[0];
    let dims_ok = lr == (128, 256) && (rec.lr_height, rec.lr_width) == (128, 256);
    outcome(
        identical && dims_ok,
        format!(
            "seed 7 x 5 fixtures twice: {} files {}; 1024x2048 -> {}x{}",
            trees[0].len(),
            if identical {
                "byte-identical"
            } else {
                "DIFFER"
            },
            lr.0,
            lr.1
        ),
    )
}

fn http_get(addr: SocketAddr, path: &str) -> (u16, Vec<u8>) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
    let head = String::from_utf8_lossy(&raw[..split]).to_string();
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    (status, raw[split + 4..].to_vec())
}

fn cli_service_equivalence() -> Outcome {
    let image = fixture(NATURAL[0]);
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(serve_listener(
        listener,
        AppState::new(Panorama::load(&image).unwrap(), None),
    ));

    let tmp = tempfile::tempdir().unwrap();
    let mut r = rng(5);
    let interps = ["slerp", "bicubic", "nearest", "slerp-exact", "slerp"];
    let mut failures = Vec::new();
    for (i, interp) in interps.iter().enumerate() {
        let yaw: f64 = r.random_range(-PI..PI);
        let pitch: f64 = r.random_range(-1.2..1.2);
        let fov: f64 = r.random_range(0.6..2.0);
        let zoom: f64 = r.random_range(0.5..3.0);
        let w: usize = r.random_range(32..200);
        let h: usize = r.random_range(32..200);
        let out = tmp.path().join(format!("{i}.png"));
        let status = Command::new(env!("CARGO_BIN_EXE_omnivr"))
            .args([
                "project",
                "--input",
                image.to_str().unwrap(),
                "--output",
                out.to_str().unwrap(),
            ])
            .args([
                "--yaw",
                &format!("{yaw:?}"),
                "--pitch",
                &format!("{pitch:?}"),
            ])
            .args(["--fov", &format!("{fov:?}"), "--zoom", &format!("{zoom:?}")])
            .args([
                "--width",
                &w.to_string(),
                "--height",
                &h.to_string(),
                "--interp",
                interp,
            ])
            .output()
            .unwrap()
            .status;
        let cli = std::fs::read(&out).unwrap_or_default();
        let (code, body) = http_get(
            addr,
            &format!("/api/view?yaw={yaw:?}&pitch={pitch:?}&fov={fov:?}&zoom={zoom:?}&w={w}&h={h}&interp={interp}"),
        );
        if !status.success() || code != 200 || cli.is_empty() || cli != body {
            failures.push(format!("tuple {i} (exit {status}, http {code})"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "5 random camera/zoom tuples: byte-identical PNGs".to_owned()
        } else {
            failures.join(", ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("projection round trip", projection_round_trip),
        ("mobius group suite", mobius_group_suite),
        ("circular-shift exactness", circular_shift_exactness),
        ("identity exactness", identity_exactness),
        ("zoom round trip", zoom_round_trip),
        ("bicubic-baseline sanity", baseline_sanity),
        ("metrics", metrics_cases),
        ("dataset determinism", dataset_determinism),
        ("cli/service equivalence", cli_service_equivalence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
