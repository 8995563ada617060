#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use roughinv::forward::{
    scattered_field, solve_forward, wavenumber, IncidentWave, Medium, ReceiverArray, Wavenumbers, SPEED_OF_LIGHT,
};
use roughinv::surface::{sample_surface, FlatProfile};

/// Flat-interface TE reflection coefficient.
pub fn fresnel(theta: f64, eps_r: f64) -> f64 {
    let cos = theta.cos();
    let root = (eps_r - theta.sin().powi(2)).sqrt();
    (cos - root) / (cos + root)
}

pub fn specular_ratio(theta: f64) -> f64 {
    let lower = Medium::new(4.0, 1.0, 0.0).unwrap();
    let frequency = SPEED_OF_LIGHT;
    let k = Wavenumbers::new(&Medium::VACUUM, &lower, frequency).unwrap();
    let wave = IncidentWave::new(theta, 8.0).unwrap();
    let width = 2.0 * PI / (10.0 * wavenumber(&lower, frequency).unwrap().re);
    let surface = sample_surface(&FlatProfile { domain_length: 16.0 }, width).unwrap();
    let sol = solve_forward(&surface, k, &wave).unwrap();
    let alpha = 4.25;
    let x = alpha * theta.tan();
    let receivers = ReceiverArray::new(vec![x], alpha).unwrap();
    let u = scattered_field(&receivers, &sol, k.k1).unwrap()[0];
    // the reflected beam is the incident beam mirrored in y = 0
    let reference = fresnel(theta, 4.0).abs() * wave.field([x, -alpha], k.k1).norm();
    u.norm() / reference
}

/// H₀⁽¹⁾ and H₁⁽¹⁾ at real arguments: (z, [Re H0, Im H0, Re H1, Im H1]),
/// frozen from mpmath at 30 digits.
pub const HANKEL_REAL: [(f64, [f64; 4]); 14] = [
    (0.01, [0.99997500015624956597, -3.0054556370836459445, 0.0049999375002604162282, -63.678596282060655049]),
    (0.1, [0.997501562066040032, -1.5342386513503668083, 0.049937526036242000321, -6.4589510947020266377]),
    (0.5, [0.93846980724081290423, -0.44451873350670655715, 0.24226845767487388638, -1.4714723926702430692]),
    (1.0, [0.76519768655796655145, 0.088256964215676957983, 0.44005058574493351596, -0.78121282130028871655]),
    (2.5, [-0.048383776468197996327, 0.49807035961523188783, 0.49709410246427403801, 0.14591813796678579888]),
    (5.0, [-0.17759677131433830435, -0.30851762524903378007, -0.32757913759146522204, 0.1478631433912268448]),
    (7.5, [0.26633965788037839687, 0.11731328614820863084, 0.13524842757970550518, -0.2591285104861162518]),
    (11.9, [0.02504944169958964508, -0.22983321394337506407, -0.22898324966192405505, -0.034711498334030609833]),
    (12.1, [0.069666773606807311849, -0.21843838055092548565, -0.21574897337692480827, -0.078736931451395745616]),
    (15.0, [-0.014224472826780773234, 0.20546429603891826479, 0.20510403861352276115, 0.02107362803687351194]),
    (30.0, [-0.086367983581040211336, -0.11729573168666402525, -0.11875106261662293652, 0.084425570661747234891]),
    (100.0, [0.019985850304223122424, -0.077244313365083152254, -0.077145352014112158033, -0.020372312002759793305]),
    (250.0, [-0.026053373425204233664, -0.043216845440366267701, -0.043269038410330749511, 0.025966992185484582261]),
    (500.0, [-0.034100556880731998265, 0.0105067087398313741, 0.010472613470372292844, 0.034111080629137135895]),
];

/// Same at complex arguments: ((Re z, Im z), [Re H0, Im H0, Re H1, Im H1]).
pub const HANKEL_COMPLEX: [((f64, f64), [f64; 4]); 9] = [
    ((1.0, 0.1), [0.68884677286119683773, 0.048531388526535073821, 0.35527451187185468302, -0.74437409390816649573]),
    ((5.0, 0.4), [-0.12666731812678683208, -0.20126050276391405584, -0.21614322674544959053, 0.10855902446950155682]),
    ((11.0, 1.0), [-0.065516079151813310105, -0.059028999381838967678, -0.062264361413421712444, 0.06320292763866579121]),
    ((13.0, 0.5), [0.12448281333456727925, -0.049797196121100765103, -0.045139881073102042925, -0.12666366550392131957]),
    ((25.1327, 0.0008), [0.11187191266027446292, -0.1130022878186195796, -0.11079992003081688991, -0.11414129395067016715]),
    ((40.0, 4.0), [0.00024887716359924471493, 0.0022906181503444657546, 0.0022967011976241040823, -0.00022089388122031618266]),
    ((0.05, 0.005), [0.93564287494659957896, -1.9762790466310301897, -1.231492839490116515, -12.661374157178164969]),
    ((3.0, 0.3), [-0.17784074890832858046, 0.28645771722128254271, 0.26599255111201116945, 0.22839078870993515872]),
    ((150.0, 10.0), [-1.3337478825247607739e-7, -2.9512083226045207434e-6, -2.9523199135080256154e-6, 1.2361346604868075382e-7]),
];
