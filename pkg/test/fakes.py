from types import SimpleNamespace

from fundamental_ratio.certificate import CertificateRecord
from fundamental_ratio.certificate import RecordStatus


def fake_bracket(xi_h, levels=0):
    return SimpleNamespace(
        h=2.0**-levels,
        dof_cr=3,
        dof_p1=3,
        lam1_h=30.0,
        lam1_low=29.5,
        rayleigh_sum=100.0,
        lam2_up=70.5,
        xi_h=xi_h,
    )


def make_certify(xi_of, calls=None):
    """Stand-in for ``certified_ratio`` returning ``xi_of(p, q)``."""

    def certify(vertices, levels, eps=None, tol=None, strict=False):
        p, q = vertices[2]
        if calls is not None:
            calls.append((p, q))
        return fake_bracket(xi_of(p, q), levels)

    return certify


def make_record(spec, p, q, t_star, t_row_min, status=None, i=0, j=0):
    return CertificateRecord(
        region=spec,
        i=i,
        j=j,
        p=p,
        q=q,
        h=0.01,
        dof_cr=10,
        dof_p1=5,
        lam1_h=30.0,
        lam1_low=29.5,
        rayleigh_sum=100.0,
        lam2_up=70.5,
        xi_h=2.3,
        t_root=t_star,
        t_star=t_star,
        t_row_min=t_row_min,
        eps=1e-9,
        safety=0.9,
        status=status or RecordStatus.CERTIFIED,
    )
