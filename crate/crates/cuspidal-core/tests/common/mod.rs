//! Shared fixtures for the integration suites: the study geometries, random
//! generators, and reference cusp tables frozen from a high-precision
//! reference run of this pipeline, independently cross-checked against
//! direct-kinematics triple-root refinement.

#![allow(dead_code)]

use cuspidal_core::geometry::{validate_geometry, ManipulatorGeometry};
use cuspidal_core::{BigReal, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic generator; every suite seeds its own stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Base anchors (0,0), (15.91,0), (0,10) with platform sides
/// (17.04, 16.54, 20.84): a wide platform over a right-triangle base with
/// cusp-bearing slices at many leg-1 lengths.
pub fn wide_platform_geometry<T: Scalar>(bits: u32) -> ManipulatorGeometry<T> {
    let f = |v: f64| T::from_f64(v, bits);
    validate_geometry(f(15.91), f(0.0), f(10.0), f(17.04), f(16.54), f(20.84))
        .expect("wide platform fixture is valid")
}

/// Base anchors (0,0), (30,0), (11,27) with a nearly collinear platform
/// (13, 9, 4): its adjugate-based coalescence condition degenerates, forcing
/// the curve-tangency fallback.
pub fn flat_platform_geometry<T: Scalar>(bits: u32) -> ManipulatorGeometry<T> {
    let f = |v: f64| T::from_f64(v, bits);
    validate_geometry(f(30.0), f(11.0), f(27.0), f(13.0), f(9.0), f(4.0))
        .expect("flat platform fixture is valid")
}

/// Platform similar to the base triangle at ratio 1/2 (base sides 21, 29,
/// 20; platform sides 10.5, 14.5, 10): a design with no cusps anywhere.
pub fn scaled_copy_geometry<T: Scalar>(bits: u32) -> ManipulatorGeometry<T> {
    let f = |v: f64| T::from_f64(v, bits);
    validate_geometry(f(21.0), f(0.0), f(20.0), f(10.5), f(14.5), f(10.0))
        .expect("scaled copy fixture is valid")
}

/// Reference cusps as `(alpha_deg, theta1_deg, L2, L3)`, sorted by
/// `theta1_deg` — the emission order of the pipeline.
pub type RefCusp = [&'static str; 4];

/// Wide platform, L₁ = 14.98: six cusps, including the easily missed
/// (L₂, L₃) ≈ (0.84, 3.78) point close to a leg collapse.
pub const REF_CUSPS_WIDE_L1_14_98: [RefCusp; 6] = [
    [
        "50.67856049651351222282046",
        "-69.12937606148826559563169",
        "0.8452820182803571183001382",
        "3.777915800478987492612815",
    ],
    [
        "170.3769528235385325163893",
        "-10.65216034793898010705836",
        "17.98854689100344146235297",
        "26.4461832930322209740769",
    ],
    [
        "-0.5985560196250122066549652",
        "15.46808864004493649190224",
        "16.02767053336934277947057",
        "29.56671397830295484698067",
    ],
    [
        "-122.8967567875148423091291",
        "114.0503394514372800066458",
        "31.27612613018788567161859",
        "16.17845041914881830961695",
    ],
    [
        "57.48140509180073705818774",
        "133.7736463039670384540589",
        "30.44913058013836903254486",
        "26.61916130197887139565304",
    ],
    [
        "-2.599848148683639310709614",
        "177.3284693345845730125046",
        "13.85146008938455067684093",
        "6.260100402757546200052374",
    ],
];

/// Wide platform, L₁ = 34: four cusps.
pub const REF_CUSPS_WIDE_L1_34: [RefCusp; 4] = [
    [
        "-3.841485063052545935505283",
        "-167.0135313395414213428062",
        "33.22051089548105708063741",
        "19.006090255527700014035",
    ],
    [
        "52.71496334142022259521386",
        "-61.76067413599314212688565",
        "19.46959635765663241063297",
        "22.6848693940693277937971",
    ],
    [
        "-1.078501918110040696712066",
        "15.43377888980240596387676",
        "35.00628542105032364525568",
        "48.64669867799562738297681",
    ],
    [
        "55.85167716559512093706558",
        "128.1956389557365315247067",
        "49.14821023987600474201788",
        "45.52034591610706096347918",
    ],
];

/// Wide platform, L₁ = 27: eight cusps.
pub const REF_CUSPS_WIDE_L1_27: [RefCusp; 8] = [
    [
        "-5.118089079536900578023477",
        "-168.4599132713059398159555",
        "26.31859544547819648745115",
        "11.84738803604916422396299",
    ],
    [
        "52.23439281174481636981809",
        "-63.22356396592029182766244",
        "12.56343177600317275096858",
        "15.71317693981407509814903",
    ],
    [
        "-168.1742847303256976566254",
        "8.703852810933738887352176",
        "5.929077819813783668917961",
        "29.74182970670903649162401",
    ],
    [
        "-0.9519848568986963095352497",
        "15.47351701763559560591764",
        "28.01711736086008653190063",
        "41.63085325428324124093426",
    ],
    [
        "-125.5430610242011359786026",
        "43.8646028553163084369735",
        "7.986445676748505273223965",
        "27.3651794221028576861265",
    ],
    [
        "-113.953452110303078510568",
        "63.88551066531295257893061",
        "13.9626291953935451086321",
        "21.6698703682579942800254",
    ],
    [
        "-129.3687664890639661625154",
        "103.6523117213546463431722",
        "35.57677405680876583487227",
        "4.805626139754608756237584",
    ],
    [
        "56.20129781617030268208373",
        "129.3664294058929539536989",
        "42.21722549972744700286577",
        "38.54520433172252217594115",
    ],
];

/// Flat platform, L₁ = 3: four cusps, reached through the tangency fallback.
pub const REF_CUSPS_FLAT_L1_3: [RefCusp; 4] = [
    [
        "12.65280736140539121410359",
        "-145.1113217792693772355163",
        "19.80884439244476596276734",
        "29.43480078021250971207291",
    ],
    [
        "156.7696237061152700150295",
        "-63.48555137282642795697695",
        "40.68020096313414021448627",
        "31.11028493165105151812968",
    ],
    [
        "-168.7421550020036296326592",
        "26.3876393165104612237671",
        "40.08054401023485150585708",
        "29.14076665676079063018238",
    ],
    [
        "-20.32206935433344590192981",
        "114.0174630988322803778616",
        "19.11278981431393265552704",
        "27.011267505499652906052",
    ],
];

/// Parse a reference row at the given precision.
pub fn parse_ref(row: &RefCusp, bits: u32) -> [BigReal; 4] {
    row.map(|s| BigReal::parse_decimal(s, bits).expect("reference literal parses"))
}

/// Uniform draw from an interval.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}
