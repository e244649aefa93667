//! Evaluating characters on group ring elements.

use iwasawa::characters::{enumerate_characters, eval_char};
use iwasawa::{GammaVector, GroupRing};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(3, 1, 2, 4)?;
    let s = GammaVector::basis(1, 0);
    let nu = ring.nu(&s, 0, 2)?;
    for chi in enumerate_characters(3, 1, 2, 100)? {
        let v = eval_char(&chi, &nu)?;
        println!(
            "chi = {chi:<8} order 3^{}  chi(nu(s1,0,2)) = {v}  valuation {}",
            chi.order_at(3, &s),
            v.valuation()
        );
    }
    Ok(())
}
