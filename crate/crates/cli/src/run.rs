//! Subcommand implementations. Every run echoes its resolved
//! configuration to stderr, writes results to stdout or `--out`, and all
//! output is a pure function of the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use vtl_core::profiler::format_sig9;
use vtl_core::{
    domain::Domain, enumerate_ball_capped, from_ball, from_box, growth_exponent, growth_rate,
    growth_series_capped, isoperimetric_profile, profile_report, random_connected, read_ball_cache,
    read_domain_file, verify_bounds_capped, write_ball_cache, write_profile_csv, DomainFamily,
    Error as CoreError, GroupElement, ProfileParams, DEFAULT_ELEMENT_CAP,
};

use crate::config::{echo_config, resolve_group, CliError, GroupConfig, Result, Store};

fn matrix_echo(cfg: &GroupConfig) -> String {
    let (m11, m12, m21, m22) = cfg.group.matrix().entries();
    format!("{m11},{m12},{m21},{m22}")
}

fn common_echo(cfg: &GroupConfig, cap: u64) -> Vec<(&'static str, String)> {
    vec![
        ("group", cfg.label.clone()),
        ("matrix", matrix_echo(cfg)),
        ("generators", cfg.gens_echo.clone()),
        ("cap", cap.to_string()),
    ]
}

fn cap_of(store: &Store) -> Result<u64> {
    Ok(store.get_u64("cap")?.unwrap_or(DEFAULT_ELEMENT_CAP))
}

/// Writes to `--out`, or to stdout when absent or `-`.
fn emit(store: &Store, content: &str) -> Result<()> {
    match store.get("out") {
        None | Some("-") => print!("{content}"),
        Some(path) => fs::write(path, content)?,
    }
    Ok(())
}

fn out_echo(store: &Store) -> String {
    store.get("out").unwrap_or("-").to_string()
}

fn series_csv(series: &[u64]) -> String {
    let mut csv = String::from("r,size\n");
    for (r, size) in series.iter().enumerate() {
        let _ = writeln!(csv, "{r},{size}");
    }
    csv
}

/// `growth`: ball sizes up to `rmax` as CSV, then polynomial and
/// exponential fits over the requested window.
pub fn growth(store: &Store) -> Result<()> {
    let cfg = resolve_group(store)?;
    let cap = cap_of(store)?;
    let rmax = store.require_u32("rmax")?;
    let fit_lo = store.get_u32("fit_lo")?.unwrap_or(2).min(rmax);
    let fit_hi = store.get_u32("fit_hi")?.unwrap_or(rmax).min(rmax);
    let mut echo = common_echo(&cfg, cap);
    echo.push(("rmax", rmax.to_string()));
    echo.push(("fit_lo", fit_lo.to_string()));
    echo.push(("fit_hi", fit_hi.to_string()));
    echo.push(("out", out_echo(store)));
    echo_config(&echo);

    let series = growth_series_capped(&cfg.group, &cfg.gens, rmax, cap)?;
    emit(store, &series_csv(&series))?;

    match growth_exponent(&series, fit_lo.max(2), fit_hi) {
        Ok((slope, r2)) => println!(
            "fit loglog slope={} r_squared={}",
            format_sig9(slope),
            format_sig9(r2)
        ),
        Err(CoreError::DegenerateFit) => println!("fit loglog skipped: window too small"),
        Err(e) => return Err(e.into()),
    }
    match growth_rate(&series, fit_lo, fit_hi) {
        Ok((slope, r2)) => println!(
            "fit semilog slope={} r_squared={}",
            format_sig9(slope),
            format_sig9(r2)
        ),
        Err(CoreError::DegenerateFit) => println!("fit semilog skipped: window too small"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn cache_path(store: &Store, cfg: &GroupConfig, radius: u32) -> Result<PathBuf> {
    if let Some(path) = store.get("cache") {
        return Ok(PathBuf::from(path));
    }
    let dir = match std::env::var("VTL_CACHE_DIR") {
        Ok(d) if !d.is_empty() => {
            fs::create_dir_all(&d)?;
            PathBuf::from(d)
        }
        _ => PathBuf::from("."),
    };
    Ok(dir.join(format!("{}-r{}.ball", cfg.label, radius)))
}

/// `ball`: enumerate a ball and keep it in the textual cache; a matching
/// cache file is read and validated instead of re-enumerated.
pub fn ball(store: &Store) -> Result<()> {
    let cfg = resolve_group(store)?;
    let cap = cap_of(store)?;
    let radius = store.require_u32("radius")?;
    let path = cache_path(store, &cfg, radius)?;
    let mut echo = common_echo(&cfg, cap);
    echo.push(("radius", radius.to_string()));
    echo.push(("cache", path.display().to_string()));
    echo_config(&echo);

    let cached = if path.exists() {
        let ball = read_ball_cache(&path, &cfg.group, &cfg.gens)?;
        (ball.radius() == radius).then_some(ball)
    } else {
        None
    };
    let (ball, action) = match cached {
        Some(ball) => (ball, "read"),
        None => {
            let ball = enumerate_ball_capped(&cfg.group, &cfg.gens, radius, cap)?;
            write_ball_cache(&ball, &path)?;
            (ball, "written")
        }
    };
    eprintln!("cache {action} {}", path.display());
    print!("{}", series_csv(ball.sizes()));
    Ok(())
}

/// Parses the `--domain` argument of `transport`.
fn build_domain(cfg: &GroupConfig, cap: u64, spec: &str) -> Result<Domain> {
    let bad = || CliError::BadValue {
        key: "domain".into(),
        value: spec.into(),
    };
    let parse_u64 = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "singleton" => {
            let mult = if body.is_empty() {
                1
            } else {
                parse_u64(body)? as u32
            };
            Ok(Domain::from_entries(
                &cfg.group,
                &cfg.gens,
                [(GroupElement::identity(), mult)],
            )?)
        }
        "ball" => {
            let n = parse_u64(body)? as u32;
            let ball = enumerate_ball_capped(&cfg.group, &cfg.gens, n, cap)?;
            Ok(from_ball(&ball, n)?)
        }
        "box" => {
            let corners: Vec<&str> = body.split(':').collect();
            if corners.len() != 2 {
                return Err(bad());
            }
            let parse_corner = |s: &str| -> Result<(i64, i64, i32)> {
                let parts: Vec<&str> = s.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad());
                }
                Ok((
                    parts[0].trim().parse().map_err(|_| bad())?,
                    parts[1].trim().parse().map_err(|_| bad())?,
                    parts[2].trim().parse().map_err(|_| bad())?,
                ))
            };
            Ok(from_box(
                &cfg.group,
                &cfg.gens,
                parse_corner(corners[0])?,
                parse_corner(corners[1])?,
            )?)
        }
        "random" => {
            let parts: Vec<&str> = body.split(',').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(random_connected(
                &cfg.group,
                &cfg.gens,
                parse_u64(parts[0])?,
                parse_u64(parts[1])? as u32,
                parse_u64(parts[2])?,
            )?)
        }
        "file" => {
            if body.is_empty() {
                return Err(bad());
            }
            Ok(read_domain_file(
                std::path::Path::new(body),
                &cfg.group,
                &cfg.gens,
            )?)
        }
        _ => Err(bad()),
    }
}

/// `transport`: run the full bound verification on one domain and print
/// the report.
pub fn transport(store: &Store) -> Result<()> {
    let cfg = resolve_group(store)?;
    let cap = cap_of(store)?;
    let spec = store.get("domain").unwrap_or("singleton").to_string();
    let mut echo = common_echo(&cfg, cap);
    echo.push(("domain", spec.clone()));
    echo.push(("out", out_echo(store)));
    echo_config(&echo);

    let domain = build_domain(&cfg, cap, &spec)?;
    let report = verify_bounds_capped(&domain, cap)?;
    emit(store, &report.to_text())?;
    Ok(())
}

/// `verify`: batch proposition checks over seeded random domains.
/// Exit status 0 means every inequality held exactly.
pub fn verify(store: &Store) -> Result<()> {
    let cfg = resolve_group(store)?;
    let cap = cap_of(store)?;
    let count = store.get_u32("count")?.unwrap_or(50);
    let seed = store.get_u64("seed")?.unwrap_or(1);
    let max_mult = store.get_u32("max_mult")?.unwrap_or(5);
    let mass_lo = store.get_u64("mass_lo")?.unwrap_or(5);
    let mass_hi = store.get_u64("mass_hi")?.unwrap_or(120);
    if mass_lo == 0 || mass_lo > mass_hi {
        return Err(CliError::BadValue {
            key: "mass_lo".into(),
            value: format!("{mass_lo}..{mass_hi}"),
        });
    }
    let mut echo = common_echo(&cfg, cap);
    echo.push(("count", count.to_string()));
    echo.push(("seed", seed.to_string()));
    echo.push(("max_mult", max_mult.to_string()));
    echo.push(("mass_lo", mass_lo.to_string()));
    echo.push(("mass_hi", mass_hi.to_string()));
    echo_config(&echo);

    for i in 0..count as u64 {
        let mm = if i % 2 == 0 { 1 } else { max_mult };
        let mass = mass_lo + (i * 13) % (mass_hi - mass_lo + 1);
        let domain = random_connected(&cfg.group, &cfg.gens, mass, mm, seed + i)?;
        let report = verify_bounds_capped(&domain, cap)?;
        println!(
            "domain i={i} seed={} mass={} gradient={} radius={} average={}/{} witness_transport={} ok",
            seed + i,
            report.mass,
            report.gradient,
            report.radius,
            report.average.numer(),
            report.average.denom(),
            report.witness.transport
        );
    }
    println!("{count}/{count} propositions hold");
    Ok(())
}

/// `profile`: sweep a domain family, emit the CSV and the fit summary.
pub fn profile(store: &Store) -> Result<()> {
    let cfg = resolve_group(store)?;
    let cap = cap_of(store)?;
    let family_raw = store.require_str("family")?;
    let family = DomainFamily::parse(family_raw).ok_or_else(|| CliError::BadValue {
        key: "family".into(),
        value: family_raw.into(),
    })?;
    let n_lo = store.require_u32("n_lo")?;
    let n_hi = store.require_u32("n_hi")?;
    let params = ProfileParams {
        seed: store.get_u64("seed")?.unwrap_or(1),
        max_mult: store.get_u32("max_mult")?.unwrap_or(1),
        mass_scale: store.get_u64("mass_scale")?.unwrap_or(8),
        cap,
    };
    let mut echo = common_echo(&cfg, cap);
    echo.push(("family", family.label().to_string()));
    echo.push(("n_lo", n_lo.to_string()));
    echo.push(("n_hi", n_hi.to_string()));
    echo.push(("seed", params.seed.to_string()));
    echo.push(("max_mult", params.max_mult.to_string()));
    echo.push(("mass_scale", params.mass_scale.to_string()));
    echo.push(("out", out_echo(store)));
    echo_config(&echo);

    let points = isoperimetric_profile(&cfg.group, &cfg.gens, family, n_lo, n_hi, &params)?;
    let mut csv = Vec::new();
    write_profile_csv(&mut csv, &cfg.label, &points).map_err(CliError::Io)?;
    emit(store, std::str::from_utf8(&csv).expect("csv is ascii"))?;

    match profile_report(&cfg.group, points) {
        Ok(report) => print!("{}", report.summary_text()),
        Err(CoreError::DegenerateFit) => {
            println!("fit-summary unavailable: needs at least 3 points with distinct gradients")
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}
