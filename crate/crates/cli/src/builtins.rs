//! Scenarios shipped with the binary, written in the scenario file format.

pub const BUILTINS: [(&str, &str); 9] = [
    (
        "s2xh2-full-pipeline",
        "[scenario]
name = s2xh2-full-pipeline
[factors]
g1 = sphere(2,1)
g2 = hyperbolic(2,1)
[build]
stages = cone, ambient, poincare, killing
[checks]
run = einstein, ambient, equivalence, dilation, killing, bach, drag
tolerance.equivalence = 1e-9
tolerance.dilation = 1e-9
tolerance.drag = 1e-6
[params]
dilation_alpha = 9/4
",
    ),
    (
        "einstein-product-s2s2",
        "[scenario]
name = einstein-product-s2s2
[factors]
g1 = einstein_product(sphere(2,1),sphere(2,1),1)
[build]
stages = cone
[checks]
run = einstein, ricci-flat, homothety
tolerance.homothety = 1e-9
",
    ),
    (
        "so4-arithmetic",
        "[scenario]
name = so4-arithmetic
[checks]
run = arithmetic
[params]
arith_factors = 6, 3/2, 6, -3/2
expect_mu = 1/40
expect_radius = 4*sqrt(5)
",
    ),
    (
        "recursion-l2",
        "[scenario]
name = recursion-l2
[factors]
g1 = hyperbolic(2,1)
positives = sphere(2,1); sphere(2,1)
[build]
stages = recursion
[checks]
run = einstein
",
    ),
    (
        "flat-ambient",
        "[scenario]
name = flat-ambient
[factors]
g1 = flat(3)
g2 = flat(2)
mu = 0
[build]
stages = ambient
[checks]
run = ambient, normal-form, homothety
tolerance.normal-form = 1e-6
tolerance.homothety = 1e-9
",
    ),
    (
        "cone-flatness",
        "[scenario]
name = cone-flatness
[factors]
g1 = sphere(2,1)
[build]
stages = cone
[checks]
run = ricci-flat, homothety, loop-identity, holonomy-rank
tolerance.homothety = 1e-9
[params]
expect_rank = 0
",
    ),
    (
        "drag-lemma-grid",
        "[scenario]
name = drag-lemma-grid
[factors]
g1 = einstein_product(sphere(2,1),sphere(2,1),1)
[build]
stages = cone
[checks]
run = drag
tolerance.drag = 1e-6
",
    ),
    (
        "transverse-holonomy",
        "[scenario]
name = transverse-holonomy
[factors]
g1 = einstein_product(sphere(2,1),sphere(2,1),1)
[build]
stages = cone
[checks]
run = holonomy
tolerance.holonomy = 1e-5
",
    ),
    (
        "bach-boundary-4d",
        "[scenario]
name = bach-boundary-4d
[factors]
g1 = sphere(2,1)
g2 = hyperbolic(2,1)
[checks]
run = bach
",
    ),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}
