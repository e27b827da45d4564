"""
几何层单元测试：闭式 λ、体素栅格化、直接求和与卷积路径、体素文件
"""

import math

import numpy as np
import pytest
from scipy import integrate

from common.contracts import AccuracyError, ConfigError, PaddingError, ParameterValidationError
from geometry.closed_forms import (
    LambdaMethod,
    _face_term,
    _transverse_term,
    lambda_cuboid,
    lambda_for_body,
    lambda_sphere,
    lambda_sphere_exact,
    radial_lambda_sphere,
)
from geometry.distributions import (
    Cuboid,
    Sphere,
    VoxelGrid,
    load_voxel_grid,
    rasterize_cuboid,
    rasterize_sphere,
    save_voxel_grid,
)
from geometry.voxel import lambda_voxel_convolution, lambda_voxel_direct
from models.constants import CONSTANTS, GAMMA_ADLER
from models.system import CollapseBody

R_C = 1e-7
MASS = 1e-17


def _gaussian_1d(x: float, r_c: float = R_C) -> float:
    return math.exp(-(x**2) / (4.0 * r_c**2)) / (2.0 * math.sqrt(math.pi) * r_c)


class TestCuboidClosedForm:
    @pytest.mark.parametrize("length", [5e-8, 1e-7, 4e-7, 3e-6])
    def test_face_term(self, length):
        expected = 2.0 * (_gaussian_1d(0.0) - _gaussian_1d(length))
        assert _face_term(length, R_C) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("length", [5e-8, 1e-7, 4e-7, 3e-6])
    def test_transverse_term(self, length):
        # ∫₀^L∫₀^L g(y − y') = ∫_{−L}^{L} (L − |u|) g(u) du
        value, _ = integrate.quad(lambda u: (length - abs(u)) * _gaussian_1d(u), -length, length, points=[0.0], epsabs=0.0, epsrel=1e-12)
        assert _transverse_term(length, R_C) == pytest.approx(value, rel=1e-10)

    def test_cube_axes_equal(self):
        result = lambda_cuboid(1e-6, 1e-6, 1e-6, MASS, GAMMA_ADLER, R_C)
        assert result.method == LambdaMethod.CLOSED_FORM_CUBOID
        x, y, z = result.axis_rates
        assert x == pytest.approx(y, rel=1e-15) and y == pytest.approx(z, rel=1e-15)
        assert result.lambda_rate == pytest.approx(x, rel=1e-15)

    def test_large_cube_surface_limit(self):
        edge = 1e-4
        result = lambda_cuboid(edge, edge, edge, MASS, GAMMA_ADLER, R_C)
        asymptotic = GAMMA_ADLER * MASS**2 / (CONSTANTS.amu**2 * math.sqrt(math.pi) * R_C * edge**4)
        assert result.lambda_rate == pytest.approx(asymptotic, rel=1e-2)

    def test_linear_in_gamma_quadratic_in_mass(self):
        base = lambda_cuboid(2e-7, 3e-7, 4e-7, MASS, 1.0, R_C).lambda_rate
        assert lambda_cuboid(2e-7, 3e-7, 4e-7, MASS, 7.0, R_C).lambda_rate == pytest.approx(7.0 * base, rel=1e-14)
        assert lambda_cuboid(2e-7, 3e-7, 4e-7, 2 * MASS, 1.0, R_C).lambda_rate == pytest.approx(4.0 * base, rel=1e-14)

    def test_invalid(self):
        with pytest.raises(ParameterValidationError):
            lambda_cuboid(1e-6, -1e-6, 1e-6, MASS, GAMMA_ADLER, R_C)
        with pytest.raises(ParameterValidationError):
            lambda_cuboid(1e-6, 1e-6, 1e-6, MASS, -1.0, R_C)


class TestSphereClosedForms:
    @pytest.mark.parametrize("radius", [5e-9, 3e-8, 1e-7, 3e-7, 1e-6])
    def test_exact_matches_radial_quadrature(self, radius):
        exact = lambda_sphere_exact(radius, MASS, GAMMA_ADLER, R_C)
        radial = radial_lambda_sphere(radius, MASS, GAMMA_ADLER, R_C)
        assert radial.method == LambdaMethod.RADIAL_QUADRATURE_SPHERE
        assert exact.lambda_rate == pytest.approx(radial.lambda_rate, rel=1e-6)

    def test_series_branch_continuous(self):
        x_lo, x_hi = 1e-2 * (1 - 1e-9), 1e-2 * (1 + 1e-9)
        lo = lambda_sphere_exact(R_C * math.sqrt(x_lo), MASS, 1.0, R_C).lambda_rate
        hi = lambda_sphere_exact(R_C * math.sqrt(x_hi), MASS, 1.0, R_C).lambda_rate
        assert lo == pytest.approx(hi, rel=1e-8)

    def test_published_form_deviation(self):
        near = lambda_sphere(R_C, MASS, GAMMA_ADLER, R_C)
        exact = lambda_sphere_exact(R_C, MASS, GAMMA_ADLER, R_C)
        assert near.est_rel_error == pytest.approx(abs(near.lambda_rate / exact.lambda_rate - 1.0), rel=1e-12)
        assert near.est_rel_error > 1.0

        far = lambda_sphere(100 * R_C, MASS, GAMMA_ADLER, R_C)
        assert far.est_rel_error < 1e-3

    def test_dispatch(self):
        sphere = lambda_for_body(CollapseBody.sphere(2e-7), MASS, GAMMA_ADLER, R_C)
        assert sphere.method == LambdaMethod.CLOSED_FORM_SPHERE_EXACT
        cube = lambda_for_body(CollapseBody.cube(1e-6), MASS, GAMMA_ADLER, R_C)
        assert cube.method == LambdaMethod.CLOSED_FORM_CUBOID

    def test_zero_gamma(self):
        assert lambda_sphere_exact(1e-6, MASS, 0.0, R_C).lambda_rate == 0.0

    def test_Lambda_conversion(self):
        result = lambda_sphere_exact(1e-6, MASS, GAMMA_ADLER, R_C)
        assert result.Lambda(MASS, 100.0) == pytest.approx(result.lambda_rate * CONSTANTS.hbar / (MASS * 100.0), rel=1e-15)

    def test_bracket_series(self):
        sympy = pytest.importorskip("sympy")
        x = sympy.symbols("x", positive=True)
        bracket = 1 + sympy.exp(-x) + (2 / x) * (sympy.exp(-x) - 1)
        series = sympy.series(bracket, x, 0, 6).removeO()
        expected = x**2 / 6 - x**3 / 12 + x**4 / 40 - x**5 / 180
        assert sympy.simplify(series - expected) == 0


class TestRasterization:
    def test_sphere_mass_exact(self):
        grid = rasterize_sphere(Sphere(2e-7, MASS), R_C / 4, R_C)
        assert grid.total_mass == pytest.approx(MASS, rel=1e-12)
        assert grid.declared_mass == MASS
        n = grid.shape[0]
        assert grid.shape == (n, n, n) and n % 2 == 1
        grid.check_padding()

    def test_sphere_symmetric(self):
        rho = rasterize_sphere(Sphere(2e-7, MASS), R_C / 4, R_C).densities
        np.testing.assert_allclose(rho, rho[::-1, :, :], rtol=1e-12)
        np.testing.assert_allclose(rho, np.transpose(rho, (1, 0, 2)), rtol=1e-12)

    def test_cuboid_occupancy(self):
        grid = rasterize_cuboid(Cuboid(2e-7, 2e-7, 2e-7, MASS), R_C / 4, R_C)
        rho = grid.densities
        assert set(np.unique(rho / rho.max()).round(12)) <= {0.0, 1.0}
        assert grid.total_mass == pytest.approx(MASS, rel=1e-12)

    def test_declared_mass_mismatch(self):
        rho = np.zeros((5, 5, 5))
        rho[2, 2, 2] = 1.0
        with pytest.raises(ParameterValidationError):
            VoxelGrid((0.0, 0.0, 0.0), 1e-8, rho, declared_mass=1.0)

    def test_negative_density_rejected(self):
        rho = np.zeros((5, 5, 5))
        rho[2, 2, 2] = 1.0
        rho[1, 1, 1] = -1.0
        with pytest.raises(ParameterValidationError):
            VoxelGrid((0.0, 0.0, 0.0), 1e-8, rho)

    def test_rotation_preserves_mass(self):
        grid = rasterize_cuboid(Cuboid(2e-7, 3e-7, 4e-7, MASS), R_C / 4, R_C)
        rotated = grid.rotated90(axis=2)
        assert rotated.shape == (grid.shape[1], grid.shape[0], grid.shape[2])
        assert rotated.total_mass == pytest.approx(grid.total_mass, rel=1e-14)


@pytest.fixture(scope="module")
def cube_grid():
    return rasterize_cuboid(Cuboid(2e-7, 2e-7, 2e-7, MASS), R_C / 4, R_C)


class TestVoxelLambda:
    def test_direct_matches_convolution(self, cube_grid):
        direct = lambda_voxel_direct(cube_grid, GAMMA_ADLER, R_C)
        conv = lambda_voxel_convolution(cube_grid, GAMMA_ADLER, R_C)
        assert direct.method == LambdaMethod.VOXEL_DIRECT
        assert conv.method == LambdaMethod.VOXEL_CONVOLUTION
        assert direct.lambda_rate == pytest.approx(conv.lambda_rate, rel=1e-8)
        np.testing.assert_allclose(direct.axis_rates, conv.axis_rates, rtol=1e-8)

    def test_cube_matches_closed_form(self, cube_grid):
        voxel = lambda_voxel_convolution(cube_grid, GAMMA_ADLER, R_C)
        closed = lambda_cuboid(2e-7, 2e-7, 2e-7, MASS, GAMMA_ADLER, R_C)
        assert voxel.lambda_rate == pytest.approx(closed.lambda_rate, rel=0.05)
        assert voxel.est_rel_error == pytest.approx(1.0 / 16.0)

    def test_sphere_matches_exact_form(self):
        grid = rasterize_sphere(Sphere(2e-7, MASS), R_C / 4, R_C)
        voxel = lambda_voxel_convolution(grid, GAMMA_ADLER, R_C)
        exact = lambda_sphere_exact(2e-7, MASS, GAMMA_ADLER, R_C)
        assert voxel.lambda_rate == pytest.approx(exact.lambda_rate, rel=0.05)

    def test_fine_sphere_matches_exact_form(self):
        grid = rasterize_sphere(Sphere(R_C, MASS), R_C / 8, R_C)
        direct = lambda_voxel_direct(grid, GAMMA_ADLER, R_C)
        conv = lambda_voxel_convolution(grid, GAMMA_ADLER, R_C)
        exact = lambda_sphere_exact(R_C, MASS, GAMMA_ADLER, R_C)
        assert direct.lambda_rate == pytest.approx(exact.lambda_rate, rel=0.02)
        assert conv.lambda_rate == pytest.approx(direct.lambda_rate, rel=1e-8)

    def test_second_order_convergence(self):
        exact = lambda_sphere_exact(R_C, MASS, GAMMA_ADLER, R_C).lambda_rate
        errors = [
            abs(lambda_voxel_convolution(rasterize_sphere(Sphere(R_C, MASS), h, R_C), GAMMA_ADLER, R_C).lambda_rate - exact)
            for h in (R_C / 4, R_C / 8)
        ]
        # 步长减半，误差约降为 1/4
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.3)

    @pytest.mark.parametrize("method", [lambda_voxel_direct, lambda_voxel_convolution])
    def test_quadratic_in_density(self, method, cube_grid):
        doubled = VoxelGrid(cube_grid.origin, cube_grid.spacing, 2.0 * cube_grid.densities)
        base = method(cube_grid, GAMMA_ADLER, R_C)
        assert method(doubled, GAMMA_ADLER, R_C).lambda_rate == pytest.approx(4.0 * base.lambda_rate, rel=1e-12)

    def test_direct_independent_of_workers(self, cube_grid):
        one = lambda_voxel_direct(cube_grid, GAMMA_ADLER, R_C, max_workers=1)
        four = lambda_voxel_direct(cube_grid, GAMMA_ADLER, R_C, max_workers=4)
        assert one.lambda_rate == four.lambda_rate

    def test_rotation_invariance(self):
        grid = rasterize_cuboid(Cuboid(2e-7, 3e-7, 2.5e-7, MASS), R_C / 4, R_C)
        base = lambda_voxel_convolution(grid, GAMMA_ADLER, R_C)
        rotated = lambda_voxel_convolution(grid.rotated90(axis=2), GAMMA_ADLER, R_C)
        assert rotated.lambda_rate == pytest.approx(base.lambda_rate, rel=1e-10)
        # 绕 z 轴旋转交换 x、y 分量
        assert rotated.axis_rates[0] == pytest.approx(base.axis_rates[1], rel=1e-10)
        assert rotated.axis_rates[1] == pytest.approx(base.axis_rates[0], rel=1e-10)
        assert rotated.axis_rates[2] == pytest.approx(base.axis_rates[2], rel=1e-10)

    def test_translation_invariance(self, cube_grid):
        base = lambda_voxel_convolution(cube_grid, GAMMA_ADLER, R_C)
        moved = lambda_voxel_convolution(cube_grid.shifted((1e-6, -2e-6, 3e-6)), GAMMA_ADLER, R_C)
        assert moved.lambda_rate == base.lambda_rate

    def test_zero_gamma(self, cube_grid):
        assert lambda_voxel_direct(cube_grid, 0.0, R_C).lambda_rate == 0.0
        assert lambda_voxel_convolution(cube_grid, 0.0, R_C).lambda_rate == 0.0

    def test_accuracy_gate(self):
        grid = rasterize_cuboid(Cuboid(2e-7, 2e-7, 2e-7, MASS), 3e-8, R_C)
        with pytest.raises(AccuracyError) as info:
            lambda_voxel_convolution(grid, GAMMA_ADLER, R_C)
        assert info.value.limit == pytest.approx(R_C / 4)

    @pytest.mark.parametrize("method", [lambda_voxel_direct, lambda_voxel_convolution])
    def test_padding_error(self, method):
        grid = VoxelGrid((0.0, 0.0, 0.0), 2e-8, np.ones((5, 5, 5)))
        with pytest.raises(PaddingError) as info:
            method(grid, GAMMA_ADLER, R_C)
        assert info.value.axis == 0


class TestVoxelFile:
    def test_save_and_load(self, tmp_path, cube_grid):
        path = save_voxel_grid(cube_grid, tmp_path / "cube.npz")
        loaded = load_voxel_grid(path)
        assert loaded.shape == cube_grid.shape
        assert loaded.spacing == cube_grid.spacing
        assert loaded.origin == cube_grid.origin
        assert loaded.declared_mass == cube_grid.declared_mass
        np.testing.assert_array_equal(loaded.densities, cube_grid.densities)

    def test_missing_array(self, tmp_path):
        path = tmp_path / "broken.npz"
        np.savez(path, dims=np.array([3, 3, 3]), spacing=1e-8)
        with pytest.raises(ConfigError):
            load_voxel_grid(path)

    def test_dims_mismatch(self, tmp_path):
        path = tmp_path / "mismatch.npz"
        np.savez(path, dims=np.array([3, 3, 4]), spacing=1e-8, origin=np.zeros(3), densities=np.ones(27))
        with pytest.raises(ConfigError):
            load_voxel_grid(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_voxel_grid(tmp_path / "absent.npz")
