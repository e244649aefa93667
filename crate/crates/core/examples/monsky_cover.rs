//! Zero sets of products of cyclotomic factors as unions of flats.

use iwasawa::characters::{verify_cover, ZpFlat};
use iwasawa::{Expr, GammaVector, GroupRing};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(2, 2, 2, 5)?;
    let a = GammaVector::new([1, 0]);
    let b = GammaVector::new([1, 1]);
    let f = Expr::product(vec![Expr::nu(a.clone(), 0, 1), Expr::nu(b.clone(), 1, 2)]);
    let mut flats = ZpFlat::cyclotomic_cover(2, 2, &a, 1)?;
    flats.extend(ZpFlat::cyclotomic_cover(2, 2, &b, 2)?);
    let rep = verify_cover(&f, &flats, &ring, 64)?;
    println!("f = {f}");
    println!("zero set {} characters, cover {} characters, equal = {}", rep.zero_set_size, rep.cover_size, rep.equal);
    Ok(())
}
