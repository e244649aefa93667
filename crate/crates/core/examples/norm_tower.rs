//! Kernels of the norm maps between quotient levels of a module.

use iwasawa::towers::{ddot_profile, IdealFamily, LambdaPresentation};
use iwasawa::{Expr, GammaVector, GroupRing, TightSet};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(2, 2, 3, 3)?;
    let family = IdealFamily::Tight(TightSet::standard(2));
    let modules = [
        ("free", LambdaPresentation::free(1)),
        ("(nu(s1,0,1))", LambdaPresentation::cyclic(vec![Expr::nu(GammaVector::basis(2, 0), 0, 1)])),
        ("(2, omega(s1,0))", LambdaPresentation::cyclic(vec![Expr::Int(2), Expr::omega(GammaVector::basis(2, 0), 0)])),
    ];
    for (name, pres) in modules {
        let rep = ddot_profile(&pres, &family, 2, 3, &ring, 100_000)?;
        println!("{name}:");
        for e in &rep.grid {
            println!("  n={} m={} kernel exponents {:?}", e.n, e.m, e.exponents);
        }
        println!("  compatible chains {:?}, stable {}", rep.chains.count, rep.stable);
    }
    Ok(())
}
