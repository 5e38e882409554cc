"""Problem builders: each instance carries one primal objective and several
solver recipes that must all reach it.

A recipe is a callable ``run(cfg=None) -> (trace, x)`` where ``x`` is the
primal solution extracted from that formulation (shadow point, dual
recovery, consensus block...).  All recipes of one instance evaluate the
same objective, which is what the cross-recipe agreement checks compare.
"""
from __future__ import annotations

import dataclasses
import warnings
import numpy as np

from . import data as datamod
from .funcs import (
    AffineGraphIndicator,
    L1Norm,
    L1Residual,
    LinfBallIndicator,
    OrthogonalComposition,
    ProxFn,
    Quadratic,
    SaddleProblem,
    SeparableProx,
    ZeroFn,
    soft_threshold,
)
from .linops import (
    AdjointOperator,
    ComposedOperator,
    DenseOperator,
    Grad2D,
    IdentityOperator,
    ImageGrid,
    LinearOperator,
    MaskOperator,
    as_vector,
)
from .solvers import (
    SolverConfig,
    chambolle_pock,
    condat,
    douglas_rachford,
    forward_backward,
    ppxa,
    projected_gradient,
)


@dataclasses.dataclass
class ProblemInstance:
    name: str
    objective: callable
    recipes: dict
    ground_truth: dict | None = None
    metadata: dict = dataclasses.field(default_factory=dict)

    def run(self, recipe: str, cfg: SolverConfig | None = None):
        if recipe not in self.recipes:
            raise KeyError(
                f"unknown recipe {recipe!r} for {self.name}; "
                f"available: {sorted(self.recipes)}"
            )
        return self.recipes[recipe](cfg)


def _merge_cfg(cfg: SolverConfig | None, **defaults) -> SolverConfig:
    if cfg is None:
        return SolverConfig(**defaults)
    updates = {k: v for k, v in defaults.items()
               if getattr(cfg, k) == getattr(SolverConfig(), k)}
    return dataclasses.replace(cfg, **updates)


def build_lasso(A: LinearOperator, y, lam: float,
                strong_convexity: float | None = None) -> ProblemInstance:
    """min 0.5 ||Ax - y||^2 + lam ||x||_1."""
    if lam < 0:
        raise ValueError("the l1 weight must be nonnegative")
    y = as_vector(y, A.out_dim)
    f = Quadratic(A, y, 1.0, strong_convexity)
    g = L1Norm(lam)
    objective = lambda x: f.value(x) + g.value(x)
    x0 = np.zeros(A.in_dim)
    L = f.lipschitz

    def fb(cfg=None):
        trace = forward_backward(f, g, x0, _merge_cfg(cfg, gamma=1.0 / L, max_iter=2000))
        return trace, trace.x

    def fista(cfg=None):
        trace = forward_backward(
            f, g, x0, _merge_cfg(cfg, gamma=1.0 / L, inertia="fista_t", max_iter=2000))
        return trace, trace.x

    def fista_beta(cfg=None):
        trace = forward_backward(
            f, g, x0, _merge_cfg(cfg, gamma=1.0 / L, inertia="fista_beta", max_iter=2000))
        return trace, trace.x

    def dr(cfg=None):
        trace = douglas_rachford(f, g, x0, _merge_cfg(cfg, gamma=1.0, max_iter=2000))
        return trace, trace.x

    recipes = {"fb": fb, "fista": fista, "fista_beta": fista_beta, "dr": dr}
    if f.strong_convexity > 0:

        def vfista(cfg=None):
            trace = forward_backward(
                f, g, x0, _merge_cfg(cfg, gamma=1.0 / L, inertia="vfista", max_iter=2000))
            return trace, trace.x

        recipes["vfista"] = vfista

    ground_truth = None
    if f._diag is not None and np.all(f._diag > 0):
        # separable closed form: soft threshold of the normal-equation data
        x_star = soft_threshold(A.adjoint(y), lam) / f._diag
        ground_truth = {"x": x_star, "objective": objective(x_star)}

    return ProblemInstance(
        name="lasso",
        objective=objective,
        recipes=recipes,
        ground_truth=ground_truth,
        metadata={"lambda": lam, "dim": A.in_dim, "lipschitz": L,
                  "f": f, "g": g},
    )


def _tv_pieces(grid: ImageGrid, lam: float):
    n = grid.rows * grid.cols
    grad = Grad2D(grid.rows, grid.cols, grid.boundary)
    y = grid.to_vector()
    return n, grad, y


def build_tv_denoise(y_img: ImageGrid, lam: float) -> ProblemInstance:
    """min 0.5 ||x - y||^2 + lam ||grad x||_1, in four reformulations.

    Recipes: splitting on the extended variable (x, z) with z = grad x
    (``dr_split`` and its parallel variant ``ppxa``), the saddle-point form
    (``cp``), the dual projection form recovered by x = y + grad* p
    (``dual_fb``), and the explicit-gradient primal-dual form (``condat``).
    """
    if lam < 0:
        raise ValueError("the TV weight must be nonnegative")
    n, grad, y = _tv_pieces(y_img, lam)
    data_fit = Quadratic(IdentityOperator(n), y)
    tv = L1Norm(lam)
    objective = lambda x: data_fit.value(x) + tv.value(grad.apply(x))

    idx_x = np.arange(n)
    idx_z = np.arange(n, 3 * n)
    split_fn = SeparableProx([(data_fit, idx_x), (tv, idx_z)], 3 * n)
    graph = AffineGraphIndicator(grad)

    def dr_split(cfg=None):
        v0 = np.concatenate([y, grad.apply(y)])
        trace = douglas_rachford(split_fn, graph, v0,
                                 _merge_cfg(cfg, gamma=1.0, max_iter=3000))
        return trace, trace.x[:n]

    def ppxa_split(cfg=None):
        trace = ppxa([(data_fit, None), (tv, grad)], y,
                     _merge_cfg(cfg, gamma=1.0, max_iter=3000))
        return trace, trace.x

    saddle = SaddleProblem(K=grad, g=data_fit, f_conj=LinfBallIndicator(lam),
                           f_primal=tv, primal_objective=objective)

    def cp(cfg=None):
        trace = chambolle_pock(saddle, y, np.zeros(grad.out_dim),
                               _merge_cfg(cfg, max_iter=3000))
        return trace, trace.x

    dual_quad = Quadratic(AdjointOperator(grad), -y)
    ball = LinfBallIndicator(lam)

    def dual_fb(cfg=None):
        # minimizes the dual projection problem but reports the primal
        # objective of the recovered point, keeping curves comparable
        trace = forward_backward(dual_quad, ball, np.zeros(grad.out_dim),
                                 _merge_cfg(cfg, gamma=1.0 / dual_quad.lipschitz,
                                            inertia="fista_t", max_iter=3000),
                                 objective=lambda p: objective(y + grad.adjoint(p)))
        p = trace.x
        return trace, y + grad.adjoint(p)

    def condat_recipe(cfg=None):
        trace = condat(data_fit, ZeroFn(), [(LinfBallIndicator(lam), grad)], y,
                       cfg=_merge_cfg(cfg, max_iter=3000), objective=objective)
        return trace, trace.x

    return ProblemInstance(
        name="tv_denoise",
        objective=objective,
        recipes={"dr_split": dr_split, "ppxa": ppxa_split, "cp": cp,
                 "dual_fb": dual_fb, "condat": condat_recipe},
        metadata={"lambda": lam, "rows": y_img.rows, "cols": y_img.cols,
                  "grad": grad, "saddle": saddle, "y": y},
    )


def build_tv_inverse(A: LinearOperator, y, lam: float, rows: int, cols: int,
                     boundary: str = "neumann") -> ProblemInstance:
    """min 0.5 ||Ax - y||^2 + lam ||grad x||_1 for a general forward map.

    Recipes: explicit gradient on the data term with a dualized TV block
    (``condat``) and a fully dualized saddle point over the stacked operator
    [A; grad] (``cp2``).
    """
    if lam < 0:
        raise ValueError("the TV weight must be nonnegative")
    n = rows * cols
    if A.in_dim != n:
        raise ValueError("forward operator does not match the grid size")
    y = as_vector(y, A.out_dim)
    grad = Grad2D(rows, cols, boundary)
    data_fit = Quadratic(A, y)
    tv = L1Norm(lam)
    objective = lambda x: data_fit.value(x) + tv.value(grad.apply(x))

    def condat_recipe(cfg=None):
        trace = condat(data_fit, ZeroFn(), [(LinfBallIndicator(lam), grad)],
                       np.zeros(n), cfg=_merge_cfg(cfg, max_iter=4000),
                       objective=objective)
        return trace, trace.x

    from .linops import StackOperator

    K = StackOperator([A, grad])
    conj_parts = SeparableProx(
        [(Quadratic(IdentityOperator(A.out_dim), -y), np.arange(A.out_dim)),
         (LinfBallIndicator(lam), np.arange(A.out_dim, A.out_dim + grad.out_dim))],
        K.out_dim)
    saddle = SaddleProblem(K=K, g=ZeroFn(), f_conj=conj_parts,
                           primal_objective=objective)

    def cp2(cfg=None):
        trace = chambolle_pock(saddle, np.zeros(n), np.zeros(K.out_dim),
                               _merge_cfg(cfg, max_iter=4000))
        return trace, trace.x

    return ProblemInstance(
        name="tv_inverse",
        objective=objective,
        recipes={"condat": condat_recipe, "cp2": cp2},
        metadata={"lambda": lam, "rows": rows, "cols": cols, "grad": grad,
                  "A": A, "saddle": saddle},
    )


def build_tvl1(y_img: ImageGrid, lam: float) -> ProblemInstance:
    """min ||x - y||_1 + lam ||grad x||_1, the impulsive-noise variant."""
    if lam < 0:
        raise ValueError("the TV weight must be nonnegative")
    n, grad, y = _tv_pieces(y_img, lam)
    data_fit = L1Residual(y)
    tv = L1Norm(lam)
    objective = lambda x: data_fit.value(x) + tv.value(grad.apply(x))

    saddle = SaddleProblem(K=grad, g=data_fit, f_conj=LinfBallIndicator(lam),
                           f_primal=tv, primal_objective=objective)

    def cp(cfg=None):
        trace = chambolle_pock(saddle, y, np.zeros(grad.out_dim),
                               _merge_cfg(cfg, max_iter=4000))
        return trace, trace.x

    idx_x = np.arange(n)
    idx_z = np.arange(n, 3 * n)
    split_fn = SeparableProx([(data_fit, idx_x), (tv, idx_z)], 3 * n)
    graph = AffineGraphIndicator(grad)

    def dr_split(cfg=None):
        v0 = np.concatenate([y, grad.apply(y)])
        trace = douglas_rachford(split_fn, graph, v0,
                                 _merge_cfg(cfg, gamma=1.0, max_iter=4000))
        return trace, trace.x[:n]

    return ProblemInstance(
        name="tvl1",
        objective=objective,
        recipes={"cp": cp, "dr_split": dr_split},
        metadata={"lambda": lam, "rows": y_img.rows, "cols": y_img.cols,
                  "grad": grad, "saddle": saddle},
    )


class OverwriteOutside(ProxFn):
    """Indicator of {x : x = target outside the mask}; prox overwrites."""

    def __init__(self, inside: np.ndarray, target: np.ndarray):
        self.inside = np.asarray(inside, dtype=bool)
        self.target = as_vector(target, self.inside.size)
        self.minimizer = self.target

    def value(self, x):
        x = as_vector(x, self.inside.size)
        dev = np.abs(np.where(self.inside, 0.0, x - self.target))
        tol = 1e-8 * (1.0 + float(np.max(np.abs(x))))
        return 0.0 if float(np.max(dev, initial=0.0)) <= tol else np.inf

    def prox(self, x, gamma):
        x = as_vector(x, self.inside.size)
        return np.where(self.inside, x, self.target)


def build_poisson_editing(source_grad, target: ImageGrid, omega) -> ProblemInstance:
    """Seamless cloning: match the source gradient inside the mask while
    pinning pixels outside it to the target.

        min 0.5 ||M (grad x - s)||^2   s.t.  x = target outside omega

    solved by projected gradient with stepsize below 2 / ||M grad||^2.
    """
    omega = np.asarray(omega, dtype=bool).ravel()
    n = target.rows * target.cols
    if omega.size != n:
        raise ValueError("mask size does not match the grid")
    if np.all(omega):
        warnings.warn("mask covers the whole grid; the pinning constraint is vacuous")
    grad = Grad2D(target.rows, target.cols, target.boundary)
    source_grad = as_vector(source_grad, grad.out_dim)
    mask2 = MaskOperator(np.concatenate([omega, omega]))
    smooth = Quadratic(ComposedOperator(mask2, grad), mask2.apply(source_grad))
    proj = OverwriteOutside(omega, target.to_vector())
    objective = lambda x: smooth.value(x) + proj.value(x)

    def pg(cfg=None):
        L = max(smooth.lipschitz, 1e-12)
        trace = projected_gradient(smooth, proj, target.to_vector(),
                                   _merge_cfg(cfg, gamma=1.0 / L, max_iter=4000))
        return trace, trace.x

    return ProblemInstance(
        name="poisson_editing",
        objective=objective,
        recipes={"projected_gradient": pg},
        metadata={"rows": target.rows, "cols": target.cols, "omega": omega,
                  "smooth": smooth, "projection": proj},
    )


def build_wavelet_reg(A: LinearOperator, y, lam: float,
                      T: LinearOperator) -> ProblemInstance:
    """min 0.5 ||Ax - y||^2 + lam ||T x||_1 for an orthogonal transform T."""
    y = as_vector(y, A.out_dim)
    f = Quadratic(A, y)
    g = OrthogonalComposition(T, L1Norm(lam))
    objective = lambda x: f.value(x) + g.value(x)
    x0 = np.zeros(A.in_dim)

    def fb(cfg=None):
        trace = forward_backward(f, g, x0,
                                 _merge_cfg(cfg, gamma=1.0 / f.lipschitz, max_iter=2000))
        return trace, trace.x

    def fista(cfg=None):
        trace = forward_backward(f, g, x0,
                                 _merge_cfg(cfg, gamma=1.0 / f.lipschitz,
                                            inertia="fista_t", max_iter=2000))
        return trace, trace.x

    return ProblemInstance(
        name="wavelet_reg",
        objective=objective,
        recipes={"fb": fb, "fista": fista},
        metadata={"lambda": lam, "f": f, "g": g},
    )


# ---------------------------------------------------------------------------
# config/fixture entry point used by the command-line front end
# ---------------------------------------------------------------------------

def _operator_from_config(spec, n: int | None = None) -> LinearOperator:
    if spec in (None, "identity"):
        if n is None:
            raise ValueError("identity operator needs a known dimension")
        return IdentityOperator(n)
    kind = spec["kind"]
    if kind == "identity":
        return IdentityOperator(int(spec.get("dim", n)))
    if kind == "dense_matrix":
        return DenseOperator(np.asarray(spec["matrix"], dtype=float))
    if kind == "mask":
        return MaskOperator(np.asarray(spec["pattern"], dtype=bool))
    if kind == "circular_conv":
        from .linops import CircularConv
        shape = tuple(spec["shape"]) if "shape" in spec else None
        return CircularConv(np.asarray(spec["kernel"], dtype=float),
                            dim=spec.get("dim", n), shape=shape)
    raise ValueError(f"unsupported operator kind {kind!r} in problem config")


def build_from_config(spec: dict, fixtures_root=None) -> ProblemInstance:
    """Build a problem instance from a JSON-style config dict.

    ``spec`` carries ``kind`` plus either inline parameters or a ``fixture``
    bundle directory (resolved against ``fixtures_root`` or the
    PROXSPLIT_FIXTURES environment variable).
    """
    import pathlib

    kind = spec.get("kind")
    bundle = None
    if "fixture" in spec:
        root = pathlib.Path(fixtures_root) if fixtures_root else datamod.fixture_root()
        path = pathlib.Path(spec["fixture"])
        bundle = datamod.load_fixture(path if path.is_absolute() else root / path)
    lam = float(spec.get("lambda", bundle.get("lambda", 0.1) if bundle else 0.1))

    if kind == "lasso":
        if bundle is not None:
            y = np.asarray(bundle["y"], dtype=float)
            if "A" in bundle:
                A = DenseOperator(np.asarray(bundle["A"], dtype=float))
            else:
                A = IdentityOperator(y.size)
        else:
            y = np.asarray(spec["y"], dtype=float)
            A = _operator_from_config(spec.get("A"), y.size)
        inst = build_lasso(A, y, lam)
        if bundle is not None and "expected" in bundle:
            inst.ground_truth = inst.ground_truth or {}
            inst.ground_truth.update(bundle["expected"])
        return inst

    if kind in ("tv_denoise", "tvl1"):
        if bundle is not None:
            rows, cols = int(bundle["rows"]), int(bundle["cols"])
            grid = ImageGrid(rows, cols, np.asarray(bundle["y"], dtype=float))
        elif "image" in spec:
            grid = datamod.image_io(spec["image"], "read")
        elif "image_csv" in spec:
            grid = datamod.read_csv_grid(spec["image_csv"])
        else:
            grid = ImageGrid.from_array(np.asarray(spec["pixels"], dtype=float))
        builder = build_tv_denoise if kind == "tv_denoise" else build_tvl1
        inst = builder(grid, lam)
        if bundle is not None and "expected" in bundle:
            inst.ground_truth = bundle["expected"]
        return inst

    if kind == "tv_inverse":
        if bundle is not None:
            rows, cols = int(bundle["rows"]), int(bundle["cols"])
            y_clean = np.asarray(bundle["y"], dtype=float)
        else:
            rows, cols = int(spec["rows"]), int(spec["cols"])
            y_clean = np.asarray(spec["y"], dtype=float)
        A = _operator_from_config(spec.get("A"), rows * cols)
        y_obs = A.apply(y_clean) if y_clean.size == A.in_dim else y_clean
        return build_tv_inverse(A, y_obs, lam, rows, cols)

    raise ValueError(f"unknown problem kind {kind!r}")
