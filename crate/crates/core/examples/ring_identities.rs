//! Distinguished elements of the finite group ring and their identities.

use iwasawa::{GammaVector, GroupRing};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(2, 2, 3, 3)?;
    let s = GammaVector::new([1, 1]);
    for n in 0..=3 {
        for m in n..=3 {
            let lhs = &ring.omega(&s, n)? * &ring.nu(&s, n, m)?;
            assert_eq!(lhs, ring.omega(&s, m)?);
        }
    }
    println!("omega(s,n) * nu(s,n,m) = omega(s,m) for s = {s}, 0 <= n <= m <= 3");

    let a = ring.nu(&s, 0, 2)?;
    println!("nu(s,0,2) has {} nonzero terms, augmentation {}", a.terms().count(), a.augmentation());
    let full = ring.nu(&s, 0, 3)?;
    println!("sharp fixes nu(s,0,3): {}, sharp fixes nu(s,0,2): {}", full.sharp() == full, a.sharp() == a);
    let low = a.project(1, 2)?;
    println!("image at level 1, precision 2^2: augmentation {}", low.augmentation());
    Ok(())
}
