//! The transport functional and its two exact bounds.
//!
//! For a domain `D` with multiplicity function `phi` and a group element
//! `gamma`, the transport is
//!
//! ```text
//! T_D(gamma) = sum over sigma in supp(phi) of |phi(sigma) - phi(sigma * gamma)|
//! ```
//!
//! Averaged over a ball `B(r)` with `|B(r)| >= 2 * mass`, the mean transport
//! is at least half the mass, so some `gamma_0` moves half the domain off
//! itself; and every transport is bounded above by `l_gamma * gradient`.
//! Both inequalities are checked in exact integer arithmetic; the reported
//! average and ratio are exact rationals.

use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::cayley::{enumerate_ball_capped, BallBuilder, CayleyBall, DEFAULT_ELEMENT_CAP};
use crate::domain::{gradient, Domain};
use crate::error::{Error, Result};
use crate::group::{GroupElement, SL2Matrix};

/// Exact rational with plenty of integer headroom.
pub type Rational = Ratio<i128>;

fn rational_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The element realizing the averaging lower bound, with its word length
/// and transport value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessInfo {
    pub element: GroupElement,
    pub length: u32,
    pub transport: u64,
}

/// Everything measured by [`verify_bounds`]. A constructed report already
/// passed both exact inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub radius: u32,
    pub ball_size: u64,
    pub mass: u64,
    pub gradient: u64,
    pub total_transport: u64,
    /// `total_transport / ball_size`, reduced.
    pub average: Rational,
    pub witness: WitnessInfo,
    /// Largest `T(gamma) / (l_gamma * gradient)` over `gamma != e`.
    pub max_ratio: Rational,
}

impl TransportReport {
    /// Renders the report as a JSON-style record with rationals as
    /// `"num/den"` strings. Field order is fixed, so equal reports render
    /// to identical bytes.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"radius\": {},", self.radius);
        let _ = writeln!(s, "  \"ball_size\": {},", self.ball_size);
        let _ = writeln!(s, "  \"mass\": {},", self.mass);
        let _ = writeln!(s, "  \"gradient\": {},", self.gradient);
        let _ = writeln!(s, "  \"total_transport\": {},", self.total_transport);
        let _ = writeln!(s, "  \"average\": \"{}\",", rational_str(&self.average));
        let _ = writeln!(
            s,
            "  \"witness\": {{ \"p\": {}, \"q\": {}, \"k\": {}, \"length\": {}, \"transport\": {} }},",
            self.witness.element.p,
            self.witness.element.q,
            self.witness.element.k,
            self.witness.length,
            self.witness.transport
        );
        let _ = writeln!(s, "  \"max_ratio\": \"{}\"", rational_str(&self.max_ratio));
        s.push_str("}\n");
        s
    }
}

fn layer_powers(d: &Domain) -> Result<Vec<SL2Matrix>> {
    d.layers()
        .iter()
        .map(|l| d.group().matrix().power(l.k))
        .collect()
}

/// Transport of one element, walking the fiber layers of the support as
/// sorted runs. Within a layer `k` the translate `sigma * gamma` is the
/// fixed shift `A^k * gamma` of the abelian coordinates, so matching
/// endpoint values is a sorted merge.
fn transport_layered(d: &Domain, powers: &[SL2Matrix], gamma: &GroupElement) -> Result<u64> {
    let layers = d.layers();
    let mut total = 0u64;
    for (layer, pow) in layers.iter().zip(powers) {
        let (cp, cq) = pow.apply((gamma.p, gamma.q))?;
        let target_k = layer
            .k
            .checked_add(gamma.k)
            .ok_or(Error::ArithmeticOverflow)?;
        let target = layers
            .binary_search_by_key(&target_k, |l| l.k)
            .ok()
            .map(|i| &layers[i]);
        let Some(target) = target else {
            total += layer.mults.iter().map(|&m| m as u64).sum::<u64>();
            continue;
        };
        // The shifts below stay inside i64 iff the extreme corners do.
        layer
            .min_p
            .checked_add(cp)
            .ok_or(Error::ArithmeticOverflow)?;
        layer
            .max_p
            .checked_add(cp)
            .ok_or(Error::ArithmeticOverflow)?;
        layer
            .min_q
            .checked_add(cq)
            .ok_or(Error::ArithmeticOverflow)?;
        layer
            .max_q
            .checked_add(cq)
            .ok_or(Error::ArithmeticOverflow)?;
        let mut j = 0usize;
        let tpts = &target.pts;
        for (i, &(p, q)) in layer.pts.iter().enumerate() {
            let key = (p + cp, q + cq);
            while j < tpts.len() && tpts[j] < key {
                j += 1;
            }
            let phi_sigma = layer.mults[i] as u64;
            if j < tpts.len() && tpts[j] == key {
                total += phi_sigma.abs_diff(target.mults[j] as u64);
                j += 1;
            } else {
                total += phi_sigma;
            }
        }
    }
    Ok(total)
}

/// `T_D(gamma)`: mass difference summed over the support.
pub fn transport(d: &Domain, gamma: GroupElement) -> Result<u64> {
    let powers = layer_powers(d)?;
    transport_layered(d, &powers, &gamma)
}

/// Transports for every ball element, in the ball's canonical order.
/// Elements are independent, so the scan is parallel; the result does not
/// depend on the number of threads.
pub(crate) fn transport_all(d: &Domain, ball: &CayleyBall) -> Result<Vec<u64>> {
    let powers = layer_powers(d)?;
    ball.elements()
        .par_iter()
        .map(|gamma| transport_layered(d, &powers, gamma))
        .collect()
}

/// The set-difference form `|D gamma \ D|` for characteristic domains.
///
/// This is an independent second route to the same number: a plain
/// membership scan, no layer machinery.
pub fn transport_set_difference(d: &Domain, gamma: GroupElement) -> Result<u64> {
    if let Some((at, mult)) = d.entries().iter().find(|(_, m)| *m != 1) {
        return Err(Error::NotCharacteristic {
            at: *at,
            mult: *mult,
        });
    }
    let group = d.group();
    let mut count = 0u64;
    for (sigma, _) in d.entries() {
        let moved = group.multiply(*sigma, gamma)?;
        if d.phi(&moved) == 0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Minimal `r` with `|B(r)| >= 2 * mass(D)`, growing the ball one level at
/// a time; also hands back the ball so callers need not re-enumerate.
pub fn select_radius_capped(d: &Domain, cap: u64) -> Result<(u32, CayleyBall)> {
    let need = d.mass().checked_mul(2).ok_or(Error::ArithmeticOverflow)?;
    let mut builder = BallBuilder::new(d.group(), d.generators(), cap);
    loop {
        let r = builder.radius();
        if builder.sizes()[r as usize] >= need {
            return Ok((r, builder.finish(r)?));
        }
        builder.extend()?;
    }
}

/// Minimal `r` with `|B(r)| >= 2 * mass(D)`, under the default element cap.
pub fn select_radius(d: &Domain) -> Result<u32> {
    select_radius_capped(d, DEFAULT_ELEMENT_CAP).map(|(r, _)| r)
}

/// Exact mean transport over `B(r)`, the identity included.
///
/// The averaging lower bound `>= mass / 2` is guaranteed only for
/// `r >= select_radius(d)`; smaller radii still yield the exact average.
pub fn average_transport(d: &Domain, r: u32) -> Result<Rational> {
    let ball = enumerate_ball_capped(d.group(), d.generators(), r, DEFAULT_ELEMENT_CAP)?;
    let transports = transport_all(d, &ball)?;
    let total = sum_checked(&transports)?;
    Ok(Rational::new(total as i128, ball.len() as i128))
}

/// First `gamma` in canonical ball order with `2 T >= mass`.
///
/// For `r >= select_radius(d)` existence is guaranteed; a miss therefore
/// only reports that the radius was below the selection rule.
pub fn find_witness(d: &Domain, r: u32) -> Result<(GroupElement, u64)> {
    let ball = enumerate_ball_capped(d.group(), d.generators(), r, DEFAULT_ELEMENT_CAP)?;
    let transports = transport_all(d, &ball)?;
    match witness_scan(d, &ball, &transports) {
        Some((g, t)) => Ok((g, t)),
        None => Err(Error::WitnessNotFound { radius: r }),
    }
}

fn witness_scan(d: &Domain, ball: &CayleyBall, transports: &[u64]) -> Option<(GroupElement, u64)> {
    let mass = d.mass() as u128;
    ball.elements()
        .iter()
        .zip(transports)
        .find(|(_, &t)| 2 * t as u128 >= mass)
        .map(|(g, &t)| (*g, t))
}

fn sum_checked(values: &[u64]) -> Result<u64> {
    let mut total = 0u64;
    for v in values {
        total = total.checked_add(*v).ok_or(Error::ArithmeticOverflow)?;
    }
    Ok(total)
}

/// Selects the radius, computes every transport over the ball, checks both
/// exact inequalities and assembles the report.
///
/// A violated inequality is an [`Error::InvariantViolation`]; it would
/// contradict the averaging or length bound and signals a bug, not bad
/// input.
pub fn verify_bounds(d: &Domain) -> Result<TransportReport> {
    verify_bounds_capped(d, DEFAULT_ELEMENT_CAP)
}

/// [`verify_bounds`] with an explicit ball element cap.
pub fn verify_bounds_capped(d: &Domain, cap: u64) -> Result<TransportReport> {
    let (radius, ball) = select_radius_capped(d, cap)?;
    let transports = transport_all(d, &ball)?;
    let total = sum_checked(&transports)?;
    let mass = d.mass();
    let ball_size = ball.len();

    // Averaging bound: 2 * total >= |B(r)| * mass, as plain integers.
    if 2 * (total as u128) < ball_size as u128 * mass as u128 {
        return Err(Error::InvariantViolation(format!(
            "averaging bound failed: 2*{total} < {ball_size}*{mass}"
        )));
    }

    let grad = gradient(d)?;
    if grad == 0 {
        return Err(Error::InvariantViolation(
            "nonempty domain with empty boundary".into(),
        ));
    }

    // Length bound: T(gamma) <= l_gamma * gradient for every ball element,
    // tracking the extreme ratio exactly.
    let mut max_ratio = Rational::new(0, 1);
    for ((g, &t), &l) in ball.elements().iter().zip(&transports).zip(ball.dists()) {
        if t as u128 > l as u128 * grad as u128 {
            return Err(Error::InvariantViolation(format!(
                "length bound failed at {g}: {t} > {l}*{grad}"
            )));
        }
        if l > 0 {
            let ratio = Rational::new(t as i128, l as i128 * grad as i128);
            if ratio > max_ratio {
                max_ratio = ratio;
            }
        }
    }

    let (element, transport) = witness_scan(d, &ball, &transports).ok_or_else(|| {
        Error::InvariantViolation("no averaging witness in the selected ball".into())
    })?;
    let length = ball.dist(&element).expect("witness came from the ball");

    Ok(TransportReport {
        radius,
        ball_size,
        mass,
        gradient: grad,
        total_transport: total,
        average: Rational::new(total as i128, ball_size as i128),
        witness: WitnessInfo {
            element,
            length,
            transport,
        },
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{default_generators, enumerate_ball, GeneratorSet};
    use crate::domain::{from_ball, random_connected};
    use crate::group::TorusBundleGroup;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(p: i64, q: i64, k: i32) -> GroupElement {
        GroupElement::new(p, q, k)
    }

    fn setup(group: TorusBundleGroup) -> (TorusBundleGroup, GeneratorSet) {
        let gens = default_generators(&group).unwrap();
        (group, gens)
    }

    fn singleton(group: &TorusBundleGroup, gens: &GeneratorSet, mult: u32) -> Domain {
        Domain::from_entries(group, gens, [(GroupElement::identity(), mult)]).unwrap()
    }

    #[test]
    fn transport_examples() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let d1 = singleton(&nil, &ngens, 1);
        assert_eq!(transport(&d1, GroupElement::identity()).unwrap(), 0);
        assert_eq!(transport(&d1, e(0, 1, 0)).unwrap(), 1);
        let d3 = singleton(&nil, &ngens, 3);
        assert_eq!(transport(&d3, GroupElement::identity()).unwrap(), 0);
        assert_eq!(transport(&d3, e(0, 1, 0)).unwrap(), 3);
    }

    #[test]
    fn set_difference_examples() {
        let (z2, zgens) = setup(TorusBundleGroup::z2());
        let d = singleton(&z2, &zgens, 1);
        assert_eq!(transport_set_difference(&d, e(1, 0, 0)).unwrap(), 1);

        let ball = enumerate_ball(&z2, &zgens, 1).unwrap();
        let diamond = from_ball(&ball, 1).unwrap();
        assert_eq!(transport_set_difference(&diamond, e(1, 0, 0)).unwrap(), 3);

        let d2 = singleton(&z2, &zgens, 2);
        assert!(matches!(
            transport_set_difference(&d2, e(1, 0, 0)),
            Err(Error::NotCharacteristic { mult: 2, .. })
        ));
    }

    #[test]
    fn the_two_transport_formulas_agree_on_characteristic_domains() {
        for group in [
            TorusBundleGroup::z2(),
            TorusBundleGroup::nil(),
            TorusBundleGroup::sol(),
        ] {
            let gens = default_generators(&group).unwrap();
            let probe = enumerate_ball(&group, &gens, 2).unwrap();
            for seed in 0..10 {
                let d = random_connected(&group, &gens, 30, 1, seed).unwrap();
                for gamma in probe.elements() {
                    assert_eq!(
                        transport(&d, *gamma).unwrap(),
                        transport_set_difference(&d, *gamma).unwrap(),
                        "group {:?} seed {seed} gamma {gamma}",
                        group.geometry()
                    );
                }
            }
        }
    }

    #[test]
    fn set_difference_is_symmetric_in_gamma() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let probe = enumerate_ball(&nil, &ngens, 3).unwrap();
        for seed in [3u64, 14, 15] {
            let d = random_connected(&nil, &ngens, 25, 1, seed).unwrap();
            for gamma in probe.elements() {
                let inv = nil.inverse(*gamma).unwrap();
                assert_eq!(
                    transport_set_difference(&d, *gamma).unwrap(),
                    transport_set_difference(&d, inv).unwrap()
                );
            }
        }
    }

    #[test]
    fn select_radius_examples() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        assert_eq!(select_radius(&singleton(&nil, &ngens, 1)).unwrap(), 1);

        let (z2, zgens) = setup(TorusBundleGroup::z2());
        assert_eq!(select_radius(&singleton(&z2, &zgens, 1)).unwrap(), 1);
        let four = crate::domain::from_box(&z2, &zgens, (0, 0, 0), (1, 1, 0)).unwrap();
        assert_eq!(four.mass(), 4);
        assert_eq!(select_radius(&four).unwrap(), 2);
    }

    #[test]
    fn average_transport_examples() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let avg = average_transport(&singleton(&nil, &ngens, 1), 1).unwrap();
        assert_eq!(avg, Rational::new(8, 9));

        let (z2, zgens) = setup(TorusBundleGroup::z2());
        let avg = average_transport(&singleton(&z2, &zgens, 1), 1).unwrap();
        assert_eq!(avg, Rational::new(4, 5));
    }

    #[test]
    fn averaging_bound_holds_at_the_selected_radius() {
        for group in [
            TorusBundleGroup::z2(),
            TorusBundleGroup::nil(),
            TorusBundleGroup::sol(),
        ] {
            let gens = default_generators(&group).unwrap();
            for seed in 0..8 {
                let d = random_connected(&group, &gens, 40, 3, seed).unwrap();
                let r = select_radius(&d).unwrap();
                let avg = average_transport(&d, r).unwrap();
                assert!(avg >= Rational::new(d.mass() as i128, 2));
            }
        }
    }

    #[test]
    fn witness_examples() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let (g, t) = find_witness(&singleton(&nil, &ngens, 1), 1).unwrap();
        // Every generator transports the whole singleton; the first in
        // canonical (dist, k, p, q) order wins the tie.
        assert_eq!(g, e(0, -1, -1));
        assert_eq!(t, 1);

        let (z2, zgens) = setup(TorusBundleGroup::z2());
        let (g, t) = find_witness(&singleton(&z2, &zgens, 1), 1).unwrap();
        assert_eq!(g, e(-1, 0, 0));
        assert_eq!(t, 1);
    }

    #[test]
    fn witness_missing_below_the_selection_rule() {
        let (z2, zgens) = setup(TorusBundleGroup::z2());
        let ball = enumerate_ball(&z2, &zgens, 2).unwrap();
        let diamond = from_ball(&ball, 2).unwrap(); // mass 13, select_radius 3
        assert!(matches!(
            find_witness(&diamond, 1),
            Err(Error::WitnessNotFound { radius: 1 })
        ));
    }

    #[test]
    fn verify_bounds_on_the_nil_singleton() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let report = verify_bounds(&singleton(&nil, &ngens, 1)).unwrap();
        assert_eq!(report.radius, 1);
        assert_eq!(report.ball_size, 9);
        assert_eq!(report.mass, 1);
        assert_eq!(report.gradient, 8);
        assert_eq!(report.total_transport, 8);
        assert_eq!(report.average, Rational::new(8, 9));
        assert_eq!(report.max_ratio, Rational::new(1, 8));
        assert_eq!(report.witness.transport, 1);
        assert_eq!(report.witness.length, 1);
    }

    #[test]
    fn verify_bounds_on_a_scaled_sol_singleton() {
        let (sol, sgens) = setup(TorusBundleGroup::sol());
        let report = verify_bounds(&singleton(&sol, &sgens, 3)).unwrap();
        assert_eq!(report.radius, 1);
        assert_eq!(report.ball_size, 13);
        assert_eq!(report.total_transport, 36);
        assert_eq!(report.average, Rational::new(36, 13));
        assert!(report.average >= Rational::new(3, 2));
    }

    #[test]
    fn verify_bounds_on_a_plane_ball_domain() {
        let (z2, zgens) = setup(TorusBundleGroup::z2());
        let ball = enumerate_ball(&z2, &zgens, 2).unwrap();
        let d = from_ball(&ball, 2).unwrap();
        let report = verify_bounds(&d).unwrap();
        assert_eq!(report.mass, 13);
        assert!(2 * report.total_transport as u128 >= report.ball_size as u128 * 13);
        assert!(report.max_ratio <= Rational::new(1, 1));
        assert!(2 * report.witness.transport >= report.mass);
    }

    #[test]
    fn report_text_is_stable() {
        let (nil, ngens) = setup(TorusBundleGroup::nil());
        let report = verify_bounds(&singleton(&nil, &ngens, 1)).unwrap();
        let text = report.to_text();
        assert_eq!(
            text,
            "{\n  \"radius\": 1,\n  \"ball_size\": 9,\n  \"mass\": 1,\n  \"gradient\": 8,\n  \"total_transport\": 8,\n  \"average\": \"8/9\",\n  \"witness\": { \"p\": 0, \"q\": -1, \"k\": -1, \"length\": 1, \"transport\": 1 },\n  \"max_ratio\": \"1/8\"\n}\n"
        );
    }

    /// One geodesic per element by greedy descent through the ball levels.
    fn geodesic_prefixes(ball: &CayleyBall, g: GroupElement) -> Vec<GroupElement> {
        let group = ball.group();
        let mut chain = vec![g];
        let mut cur = g;
        while !cur.is_identity() {
            let d = ball.dist(&cur).expect("inside the ball");
            let mut stepped = false;
            for s in ball.generators().closure() {
                let prev = group.multiply(cur, group.inverse(*s).unwrap()).unwrap();
                if ball.dist(&prev) == Some(d - 1) {
                    cur = prev;
                    chain.push(cur);
                    stepped = true;
                    break;
                }
            }
            assert!(stepped, "ball levels must be connected downwards");
        }
        chain.reverse();
        chain
    }

    /// The telescoping estimate behind the length bound, evaluated along
    /// one geodesic.
    #[test]
    fn transport_telescopes_along_geodesics() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        let mut sampled = 0;
        for group in [
            TorusBundleGroup::z2(),
            TorusBundleGroup::nil(),
            TorusBundleGroup::sol(),
        ] {
            let gens = default_generators(&group).unwrap();
            let ball = enumerate_ball(&group, &gens, 3).unwrap();
            while sampled % 17 != 16 {
                let d = random_connected(&group, &gens, 20, 3, sampled as u64).unwrap();
                let gamma = ball.elements()[rng.random_range(1..ball.len() as usize)];
                let prefixes = geodesic_prefixes(&ball, gamma);
                assert_eq!(prefixes.len() as u32 - 1, ball.dist(&gamma).unwrap());
                let mut telescoped = 0u64;
                for step in prefixes.windows(2) {
                    for (sigma, m) in d.entries() {
                        let a = d.phi(&group.multiply(*sigma, step[1]).unwrap()) as u64;
                        let b = d.phi(&group.multiply(*sigma, step[0]).unwrap()) as u64;
                        telescoped += a.abs_diff(b);
                        let _ = m;
                    }
                }
                assert!(transport(&d, gamma).unwrap() <= telescoped);
                sampled += 1;
            }
            sampled += 1;
        }
        assert!(sampled >= 50);
    }

    #[test]
    fn length_bound_holds_pointwise() {
        let (sol, sgens) = setup(TorusBundleGroup::sol());
        for seed in 0..5 {
            let d = random_connected(&sol, &sgens, 35, 4, seed).unwrap();
            let report = verify_bounds(&d).unwrap();
            let ball = enumerate_ball(&sol, &sgens, report.radius).unwrap();
            let grad = report.gradient;
            for (g, l) in ball.elements().iter().zip(ball.dists()) {
                let t = transport(&d, *g).unwrap();
                assert!(t as u128 <= *l as u128 * grad as u128);
            }
        }
    }
}
