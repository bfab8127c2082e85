import pytest

from extremal.extension import (ExtensionError, check_simple, coefficient_sigma_matches, extend,
                                form_scaling_check, radical_of_form, sigma_checks)
from extremal.fields import GF
from extremal.geometry import build_geometry, flag_model, match_geometries
from extremal.hermitian import SemilinearInvolution, SesquiForm, build_symplectic, build_unitary
from extremal.lie import center, enumerate_extremal, sl


@pytest.fixture(scope="module")
def su3_4():
    h = SesquiForm.standard(GF(4), 3)
    return h, extend(build_unitary(h).full, GF(4))


def test_extension_keeps_structure_constants(su3_4):
    _, E = su3_4
    assert E.dim == E.base.dim == 8
    assert E.checks == {"same_structure": True, "same_gram": True}


def test_extension_matches_flag_geometry(su3_4):
    _, E = su3_4
    assert match_geometries(build_geometry(E.lie), flag_model(3, GF(4))) is not None
    assert radical_of_form(E).dim == 0 and check_simple(E)


def test_sigma_is_the_unitary_involution(su3_4):
    h, E = su3_4
    assert coefficient_sigma_matches(E, SemilinearInvolution(GF(4), h.gram))
    assert all(sigma_checks(E, enumerate_extremal(E.lie)).values())


def test_form_scales_by_both_coefficients(su3_4):
    _, E = su3_4
    pts = enumerate_extremal(E.base)
    pairs = [(pts[0].coords, p.coords) for p in pts[:6]]
    ok, witness = form_scaling_check(E, pairs, list(GF(4).scalars()))
    assert ok, witness


def test_su3_over_gf9_has_central_radical():
    K = GF(9)
    A = build_unitary(SesquiForm.standard(K, 3)).full
    E = extend(A, K)
    # 3 = 0 here, so the scalar matrices are traceless and skew
    assert center(A).dim == 1
    assert radical_of_form(E).dim == 1 and not check_simple(E)
    assert match_geometries(build_geometry(E.lie), flag_model(3, K)) is not None


def test_su4_over_gf9_is_simple():
    K = GF(9)
    E = extend(build_unitary(SesquiForm.standard(K, 4)).full, K)
    assert E.dim == 15
    assert radical_of_form(E).dim == 0 and check_simple(E)


def test_sp4_over_gf25():
    A = build_symplectic(SesquiForm.standard_symplectic(GF(5), 4)).full
    E = extend(A, GF(25))
    assert E.dim == 10 and radical_of_form(E).dim == 0


def test_sl33_radical_is_the_centre():
    A = sl(3, GF(3))
    E = extend(A, GF(9))
    assert radical_of_form(A).dim == 1 and radical_of_form(E).dim == 1


def test_wrong_field_rejected():
    with pytest.raises(ExtensionError):
        extend(sl(3, GF(3)), GF(25))
    with pytest.raises(ExtensionError):
        extend(sl(3, GF(5)), GF(5))
