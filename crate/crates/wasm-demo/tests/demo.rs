use deanery_wasm::{classify, curve, rate};

#[test]
fn rating_calculator() {
    let r = rate("option1", 50, 30, 10).unwrap();
    assert_eq!(r.final_rating, 90);
    assert_eq!(r.numeral, 5);
    assert_eq!(r.bonus_counted, 10);
    assert!(r.admitted);

    let r = rate("option1", 49, 20, 10).unwrap();
    assert_eq!((r.final_rating, r.bonus_counted, r.word), (69, 0, "удовл"));
    assert!(!rate("option1", 30, 0, 0).unwrap().admitted);
    assert!(rate("option1", 61, 0, 0).is_err());
    assert!(rate("option2", 80, 21, 0).is_err());
    assert!(rate("option3", 0, 0, 0).is_err());
}

#[test]
fn mastery_classifier() {
    let cases = [
        (4, 10, "red", "40%"),
        (3, 10, "yellow", "30%"),
        (1, 15, "yellow", "6,7%"),
        (0, 15, "green", "0%"),
    ];
    for (n, t, color, percent) in cases {
        let m = classify(n, t).unwrap();
        assert_eq!((m.color.as_str(), m.percent.as_str()), (color, percent));
    }
    assert!(classify(0, 0).is_err());
    assert!(classify(3, 2).is_err());
}

#[test]
fn curve_is_monotone_and_capped() {
    let points = curve("option2", 80, 20).unwrap();
    assert_eq!(points.len(), 21);
    assert!(points
        .windows(2)
        .all(|w| w[0].final_rating <= w[1].final_rating));
    assert_eq!(points.last().unwrap().final_rating, 100);
    assert_eq!(curve("option1", 40, 0).unwrap()[0].final_rating, 40);
}
