//! Linear and character-theoretic membership in an ideal, with a seeded cross-check.

use iwasawa::ideals::{IdealMembership, IdealSpec};
use iwasawa::sampling::cross_check;
use iwasawa::{GammaVector, GroupRing};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(3, 2, 2, 4)?;
    let spec = IdealSpec::rn(vec![0, -1], vec![2, 1]);
    let ideal = IdealMembership::new(&spec, &ring)?;
    let delta = ideal.delta(729)?;
    let total = ring.size() as u64 * ring.prec() as u64;
    println!(
        "ideal {spec}: index 3^{} in R, {} characters in its zero set",
        total - ideal.order_exp(),
        delta.len()
    );

    let x = ring.omega(&GammaVector::basis(2, 1), 1)?;
    println!("omega(s2,1): linear {}, char {}", ideal.member_linear(&x)?, ideal.member_char(&x, &delta)?);

    let report = cross_check(&ideal, &delta, 100, 42)?;
    println!("cross-check: {}/{} agree", report.agreements, report.samples);
    Ok(())
}
