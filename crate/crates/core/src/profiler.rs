//! Profile sweeps and exponent fits.
//!
//! A profile point is one measured pair `(gradient, mass)` for a member of
//! a domain family, together with the transport data of its report. The
//! fits are ordinary least squares; this module is the only place floating
//! point enters the crate.

use std::io;

use crate::cayley::{enumerate_ball_capped, GeneratorSet};
use crate::domain::{from_ball, from_box, random_connected, Domain};
use crate::error::{Error, Result};
use crate::group::{Geometry, TorusBundleGroup};
use crate::transport::{verify_bounds_capped, Rational};

/// The built-in domain families swept by the profiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainFamily {
    /// Characteristic domains on metric balls `B(n)`.
    Balls,
    /// Characteristic domains on coordinate boxes `[-n, n]^3`.
    Boxes,
    /// Seeded random connected domains of target mass `mass_scale*(n+1)^2`.
    Random,
}

impl DomainFamily {
    pub fn label(&self) -> &'static str {
        match self {
            DomainFamily::Balls => "balls",
            DomainFamily::Boxes => "boxes",
            DomainFamily::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<DomainFamily> {
        match s {
            "balls" => Some(DomainFamily::Balls),
            "boxes" => Some(DomainFamily::Boxes),
            "random" => Some(DomainFamily::Random),
            _ => None,
        }
    }
}

impl std::fmt::Display for DomainFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Knobs of a profile sweep. The random family derives the seed of point
/// `n` as `seed + n`, so a fixed configuration reproduces every point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileParams {
    pub seed: u64,
    pub max_mult: u32,
    pub mass_scale: u64,
    pub cap: u64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            seed: 1,
            max_mult: 1,
            mass_scale: 8,
            cap: crate::cayley::DEFAULT_ELEMENT_CAP,
        }
    }
}

/// One measured sample of the isoperimetric profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub family: String,
    pub n: u32,
    pub mass: u64,
    pub gradient: u64,
    pub radius: u32,
    pub avg_transport: Rational,
    pub witness_length: u32,
}

/// Which asymptotic shape the sweep is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentClaim {
    Quadratic,
    FourThirds,
    NLogN,
}

impl std::fmt::Display for ExponentClaim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExponentClaim::Quadratic => "quadratic",
            ExponentClaim::FourThirds => "four_thirds",
            ExponentClaim::NLogN => "n_log_n",
        };
        f.write_str(s)
    }
}

/// Profile points plus the fitted exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub points: Vec<ProfilePoint>,
    pub loglog_slope: f64,
    pub loglog_intercept: f64,
    pub r_squared: f64,
    /// `mass / (gradient * ln gradient)` per point; empty when some
    /// gradient is below 2.
    pub nlogn_ratios: Vec<f64>,
    pub exponent_claim: ExponentClaim,
}

/// Sweeps one family over `n = n_lo ..= n_hi`. Every point passes the exact
/// transport checks of `verify_bounds` on the way in.
pub fn isoperimetric_profile(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    family: DomainFamily,
    n_lo: u32,
    n_hi: u32,
    params: &ProfileParams,
) -> Result<Vec<ProfilePoint>> {
    if n_lo > n_hi {
        return Ok(Vec::new());
    }
    let shared_ball = match family {
        DomainFamily::Balls => Some(enumerate_ball_capped(group, gens, n_hi, params.cap)?),
        _ => None,
    };
    let mut points = Vec::new();
    for n in n_lo..=n_hi {
        let domain: Domain = match family {
            DomainFamily::Balls => from_ball(shared_ball.as_ref().expect("built above"), n)?,
            DomainFamily::Boxes => {
                let n64 = n as i64;
                from_box(group, gens, (-n64, -n64, -(n as i32)), (n64, n64, n as i32))?
            }
            DomainFamily::Random => {
                let target = params
                    .mass_scale
                    .checked_mul((n as u64 + 1) * (n as u64 + 1))
                    .ok_or(Error::ArithmeticOverflow)?;
                random_connected(group, gens, target, params.max_mult, params.seed + n as u64)?
            }
        };
        let report = verify_bounds_capped(&domain, params.cap)?;
        points.push(ProfilePoint {
            family: family.label().to_string(),
            n,
            mass: report.mass,
            gradient: report.gradient,
            radius: report.radius,
            avg_transport: report.average,
            witness_length: report.witness.length,
        });
    }
    Ok(points)
}

/// Plain two-pass least squares on centered data.
/// Returns `(slope, intercept, r_squared)`.
fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() < 3 {
        return Err(Error::DegenerateFit);
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let syy: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok((slope, intercept, r_squared))
}

fn distinct(values: impl Iterator<Item = u64>) -> usize {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Least-squares fit of `ln mass` against `ln gradient`; the slope
/// estimates the isoperimetric exponent.
pub fn fit_loglog_slope(points: &[ProfilePoint]) -> Result<(f64, f64, f64)> {
    if distinct(points.iter().map(|p| p.gradient)) < 3 {
        return Err(Error::DegenerateFit);
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.gradient as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.mass as f64).ln()).collect();
    ols(&xs, &ys)
}

/// `mass / (gradient * ln gradient)` per point, in family order.
pub fn fit_nlogn_ratios(points: &[ProfilePoint]) -> Result<Vec<f64>> {
    if points.iter().any(|p| p.gradient < 2) {
        return Err(Error::DegenerateInput);
    }
    Ok(points
        .iter()
        .map(|p| p.mass as f64 / (p.gradient as f64 * (p.gradient as f64).ln()))
        .collect())
}

/// Log-log growth fit: slope of `ln series[r]` against `ln r` over
/// `r = r_lo ..= r_hi`. Estimates a polynomial growth degree.
pub fn growth_exponent(series: &[u64], r_lo: u32, r_hi: u32) -> Result<(f64, f64)> {
    if r_lo < 2 || (r_hi as usize) >= series.len() || r_hi < r_lo + 2 {
        return Err(Error::DegenerateFit);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in r_lo..=r_hi {
        let v = series[r as usize];
        if v == 0 {
            return Err(Error::DegenerateFit);
        }
        xs.push((r as f64).ln());
        ys.push((v as f64).ln());
    }
    let (slope, _, r_squared) = ols(&xs, &ys)?;
    Ok((slope, r_squared))
}

/// Semilog growth fit: slope of `ln series[r]` against `r`. Estimates the
/// exponential growth rate.
pub fn growth_rate(series: &[u64], r_lo: u32, r_hi: u32) -> Result<(f64, f64)> {
    if (r_hi as usize) >= series.len() || r_hi < r_lo + 2 {
        return Err(Error::DegenerateFit);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in r_lo..=r_hi {
        let v = series[r as usize];
        if v == 0 {
            return Err(Error::DegenerateFit);
        }
        xs.push(r as f64);
        ys.push((v as f64).ln());
    }
    let (slope, _, r_squared) = ols(&xs, &ys)?;
    Ok((slope, r_squared))
}

/// Assembles the report for a finished sweep. The claim follows the coarse
/// geometry of the group; ratios are filled only when every gradient
/// admits them.
pub fn profile_report(
    group: &TorusBundleGroup,
    points: Vec<ProfilePoint>,
) -> Result<ProfileReport> {
    let (loglog_slope, loglog_intercept, r_squared) = fit_loglog_slope(&points)?;
    let nlogn_ratios = fit_nlogn_ratios(&points).unwrap_or_default();
    let exponent_claim = match group.geometry() {
        Geometry::Nil => ExponentClaim::FourThirds,
        Geometry::Sol => ExponentClaim::NLogN,
        Geometry::Euclidean | Geometry::Finite => ExponentClaim::Quadratic,
    };
    Ok(ProfileReport {
        points,
        loglog_slope,
        loglog_intercept,
        r_squared,
        nlogn_ratios,
        exponent_claim,
    })
}

/// Renders a float with 9 significant digits, scientific notation.
pub fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// One CSV row per point:
/// `group,family,n,mass,gradient,radius,avg_num,avg_den,witness_len`.
pub fn write_profile_csv<W: io::Write>(
    w: &mut W,
    group_label: &str,
    points: &[ProfilePoint],
) -> io::Result<()> {
    writeln!(
        w,
        "group,family,n,mass,gradient,radius,avg_num,avg_den,witness_len"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            group_label,
            p.family,
            p.n,
            p.mass,
            p.gradient,
            p.radius,
            p.avg_transport.numer(),
            p.avg_transport.denom(),
            p.witness_length
        )?;
    }
    Ok(())
}

impl ProfileReport {
    /// Flat `key=value` record of the fit results.
    pub fn summary_text(&self) -> String {
        let ratios: Vec<String> = self.nlogn_ratios.iter().map(|r| format_sig9(*r)).collect();
        let mut out = String::from("fit-summary v1\n");
        out.push_str(&format!("points={}\n", self.points.len()));
        out.push_str(&format!("exponent_claim={}\n", self.exponent_claim));
        out.push_str(&format!(
            "loglog_slope={}\n",
            format_sig9(self.loglog_slope)
        ));
        out.push_str(&format!(
            "loglog_intercept={}\n",
            format_sig9(self.loglog_intercept)
        ));
        out.push_str(&format!("r_squared={}\n", format_sig9(self.r_squared)));
        out.push_str(&format!("nlogn_ratios={}\n", ratios.join(",")));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::default_generators;
    use crate::domain::gradient;

    fn synthetic(points: &[(u64, u64)]) -> Vec<ProfilePoint> {
        points
            .iter()
            .enumerate()
            .map(|(i, (grad, mass))| ProfilePoint {
                family: "balls".into(),
                n: i as u32,
                mass: *mass,
                gradient: *grad,
                radius: 1,
                avg_transport: Rational::new(1, 2),
                witness_length: 1,
            })
            .collect()
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let square = synthetic(&[(2, 4), (3, 9), (5, 25), (7, 49), (10, 100)]);
        let (slope, _, r2) = fit_loglog_slope(&square).unwrap();
        assert!((slope - 2.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);

        let linear = synthetic(&[(2, 2), (3, 3), (5, 5), (9, 9)]);
        let (slope, intercept, _) = fit_loglog_slope(&linear).unwrap();
        assert!((slope - 1.0).abs() < 1e-9);
        assert!(intercept.abs() < 1e-9);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        let two_distinct = synthetic(&[(2, 4), (2, 5), (3, 9)]);
        assert!(matches!(
            fit_loglog_slope(&two_distinct),
            Err(Error::DegenerateFit)
        ));
        let short = synthetic(&[(2, 4), (3, 9)]);
        assert!(matches!(
            fit_loglog_slope(&short),
            Err(Error::DegenerateFit)
        ));
    }

    #[test]
    fn nlogn_ratio_examples() {
        let single = synthetic(&[(2, 1)]);
        let ratios = fit_nlogn_ratios(&single).unwrap();
        assert_eq!(ratios.len(), 1);
        assert!((ratios[0] - 1.0 / (2.0 * 2f64.ln())).abs() < 1e-12);
        assert!((ratios[0] - 0.7213475204444817).abs() < 1e-12);

        let with_unit_gradient = synthetic(&[(1, 1), (2, 2)]);
        assert!(matches!(
            fit_nlogn_ratios(&with_unit_gradient),
            Err(Error::DegenerateInput)
        ));
    }

    #[test]
    fn growth_exponent_recovers_exact_powers() {
        let quartic: Vec<u64> = (0..16u64).map(|r| r.pow(4).max(1)).collect();
        let (slope, r2) = growth_exponent(&quartic, 2, 15).unwrap();
        assert!((slope - 4.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);

        let plane: Vec<u64> = (0..=20u64).map(|r| 2 * r * r + 2 * r + 1).collect();
        let (slope, _) = growth_exponent(&plane, 6, 20).unwrap();
        assert!((1.9..=2.1).contains(&slope));

        assert!(matches!(
            growth_exponent(&plane, 1, 20),
            Err(Error::DegenerateFit)
        ));
        assert!(matches!(
            growth_exponent(&plane, 6, 25),
            Err(Error::DegenerateFit)
        ));
        assert!(matches!(
            growth_exponent(&plane, 6, 7),
            Err(Error::DegenerateFit)
        ));
    }

    #[test]
    fn growth_rate_recovers_exact_exponentials() {
        let series: Vec<u64> = (0..12u32).map(|r| 3u64.pow(r)).collect();
        let (slope, r2) = growth_rate(&series, 0, 11).unwrap();
        assert!((slope - 3f64.ln()).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    /// The normal-equations route, written independently of `ols`.
    fn normal_equations(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        (slope, intercept)
    }

    #[test]
    fn ols_agrees_with_the_normal_equations() {
        let points = synthetic(&[(2, 5), (3, 11), (5, 24), (8, 70), (13, 180), (21, 444)]);
        let (slope, intercept, _) = fit_loglog_slope(&points).unwrap();
        let xs: Vec<f64> = points.iter().map(|p| (p.gradient as f64).ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| (p.mass as f64).ln()).collect();
        let (slope2, intercept2) = normal_equations(&xs, &ys);
        assert!((slope - slope2).abs() < 1e-9);
        assert!((intercept - intercept2).abs() < 1e-9);
    }

    #[test]
    fn profile_points_for_small_ball_families() {
        let z2 = TorusBundleGroup::z2();
        let zgens = default_generators(&z2).unwrap();
        let pts = isoperimetric_profile(
            &z2,
            &zgens,
            DomainFamily::Balls,
            0,
            0,
            &ProfileParams::default(),
        )
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].mass, 1);
        assert_eq!(pts[0].gradient, 4);

        let nil = TorusBundleGroup::nil();
        let ngens = default_generators(&nil).unwrap();
        let pts = isoperimetric_profile(
            &nil,
            &ngens,
            DomainFamily::Balls,
            0,
            1,
            &ProfileParams::default(),
        )
        .unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].mass, pts[0].gradient), (1, 8));
        assert_eq!(pts[1].mass, 9);
        let ball = crate::cayley::enumerate_ball(&nil, &ngens, 1).unwrap();
        let d1 = crate::domain::from_ball(&ball, 1).unwrap();
        assert_eq!(pts[1].gradient, gradient(&d1).unwrap());
    }

    #[test]
    fn profiles_are_deterministic() {
        let nil = TorusBundleGroup::nil();
        let gens = default_generators(&nil).unwrap();
        let params = ProfileParams {
            seed: 7,
            max_mult: 3,
            ..ProfileParams::default()
        };
        let a = isoperimetric_profile(&nil, &gens, DomainFamily::Random, 0, 3, &params).unwrap();
        let b = isoperimetric_profile(&nil, &gens, DomainFamily::Random, 0, 3, &params).unwrap();
        assert_eq!(a, b);
        assert!(
            isoperimetric_profile(&nil, &gens, DomainFamily::Random, 3, 2, &params)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn box_family_points_have_box_masses() {
        let z2 = TorusBundleGroup::z2();
        let gens = default_generators(&z2).unwrap();
        let pts = isoperimetric_profile(
            &z2,
            &gens,
            DomainFamily::Boxes,
            1,
            3,
            &ProfileParams::default(),
        )
        .unwrap();
        let masses: Vec<u64> = pts.iter().map(|p| p.mass).collect();
        assert_eq!(masses, vec![9, 25, 49]);
    }

    #[test]
    fn summary_text_is_stable() {
        let points = synthetic(&[(2, 4), (3, 9), (5, 25)]);
        let report = profile_report(&TorusBundleGroup::z2(), points).unwrap();
        let text = report.summary_text();
        assert!(text.starts_with("fit-summary v1\npoints=3\nexponent_claim=quadratic\n"));
        assert!(text.contains("loglog_slope=2.00000000e0\n"));
        let again = report.summary_text();
        assert_eq!(text, again);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(4.0 / 3.0), "1.33333333e0");
        assert_eq!(format_sig9(-0.5), "-5.00000000e-1");
        assert_eq!(format_sig9(0.0), "0.00000000e0");
    }
}
