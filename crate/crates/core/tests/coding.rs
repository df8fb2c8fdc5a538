use fogmatch::coding::{code_parameters, dmr_optimal_code, optimal_k, CodeScheme, ContentSpec, Rounding};

#[test]
fn two_content_design() {
    let spec = ContentSpec::new(vec![2.0, 3.0]).unwrap();
    assert_eq!(optimal_k(&spec, 5, Rounding::default()).unwrap(), vec![2, 3]);
    let codes = dmr_optimal_code(&spec, 5).unwrap();
    assert_eq!((codes[0].n, codes[0].k, codes[0].d), (5, 2, Some(2)));
    assert_eq!((codes[1].n, codes[1].k, codes[1].d), (5, 3, Some(3)));
    assert_eq!(codes[0].alpha, 1.0);
    assert_eq!(codes[1].alpha, 1.0);
    assert_eq!(codes[0].beta, Some(2.0));
    assert_eq!(codes[1].beta, Some(3.0));
}

#[test]
fn mbr_equals_msr_for_single_fragment() {
    let msr = code_parameters(CodeScheme::Msr, 2.5, 5, 1, 4).unwrap();
    let mbr = code_parameters(CodeScheme::Mbr, 2.5, 5, 1, 4).unwrap();
    assert_eq!(msr.alpha, mbr.alpha);
}

#[test]
fn mbr_stores_more() {
    for k in 2..=4 {
        let msr = code_parameters(CodeScheme::Msr, 2.0, 5, k, 4).unwrap();
        let mbr = code_parameters(CodeScheme::Mbr, 2.0, 5, k, 4).unwrap();
        assert!(mbr.alpha > msr.alpha);
        assert!(mbr.beta.unwrap() <= msr.beta.unwrap());
    }
}
