import json

import pytest

from qes_spectra import NumericsCfg, Variant, add_preset_config, create_numerics_cfg, create_spec, \
    get_preset_config, get_sweep_config, list_presets


def test_builtin_presets():
    presets = list_presets()
    for name in ('plus-m1', 'minus-m2', 'plus-m3', 'plus-m3-critical', 'minus-m4', 'minus-m12'):
        assert name in presets
    # natural sort keeps m12 after m4
    assert presets.index('minus-m4') < presets.index('minus-m12')


def test_get_preset_config_is_copy():
    cfg = get_preset_config('plus-m3')
    cfg['m'] = 99
    assert get_preset_config('plus-m3')['m'] == 3
    assert get_preset_config('no-such-preset') is None


def test_create_spec_from_preset():
    s = create_spec('plus-m3')
    assert s.variant is Variant.PLUS and s.m == 3 and s.zeta == 0.25
    s = create_spec('plus-m3', zeta=2., variant='minus')
    assert s.variant is Variant.MINUS and s.zeta == 2. and s.m == 3


def test_create_spec_explicit():
    s = create_spec(variant='minus', zeta=1., m=4)
    assert s.m == 4
    with pytest.raises(ValueError):
        create_spec(variant='minus', m=4)
    with pytest.raises(RuntimeError):
        create_spec('no-such-preset')


def test_numerics_cfg():
    assert create_numerics_cfg() == NumericsCfg()
    cfg = create_numerics_cfg('plus-m3-critical', tol_real=1e-7, unknown_key=3)
    assert cfg.tol_real == 1e-7
    assert cfg.degenerate_gap == 1e-6
    assert create_numerics_cfg(tol_real=None).tol_real == NumericsCfg().tol_real


def test_sweep_config():
    sweep = get_sweep_config('minus-m4')
    assert sweep == {'zeta_min': 0., 'zeta_max': 5., 'steps': 51}
    assert get_sweep_config('plus-m3-critical') is None


def test_add_preset_config(tmp_path):
    path = tmp_path / 'minus-m7.json'
    path.write_text(json.dumps({'variant': 'minus', 'm': 7, 'zeta': 1.5}))
    (tmp_path / 'broken.json').write_text(json.dumps({'variant': 'plus'}))
    add_preset_config(tmp_path)
    assert 'minus-m7' in list_presets()
    assert 'broken' not in list_presets()
    assert create_spec('minus-m7').m == 7
