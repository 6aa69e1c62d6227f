"""Tiny writers for schema-conformant CSVs used across the test files."""

RESULT_HEADER = ("axis,value,method,seed,se_bps_hz,ee_bps_hz_w,objective,"
                 "p_sys_w,max_residual,outer_iters,wall_ms,feasible")

TRACE_HEADER = ("iteration,objective,se,ee,tau,max_residual,"
                "inner_precoder,inner_ris,wall_ms")


def result_line(axis="kappa", value=0.5, method="ARIS", seed=7, se=1.0,
                ee=0.2, objective=0.2, p_sys=5.0, residual=0.0, iters=8,
                wall=12.5, feasible=False):
    return (f"{axis},{value!r},{method},{seed},{se!r},{ee!r},{objective!r},"
            f"{p_sys!r},{residual!r},{iters},{wall!r},"
            f"{'true' if feasible else 'false'}")


def write_results(path, lines):
    path.write_text(RESULT_HEADER + "\n" + "\n".join(lines) + "\n")
    return path


def trace_line(iteration=1, objective=0.1, se=0.5, ee=0.1, tau=0.2,
               residual=0.0, inner_f=2, inner_phi=2, wall=30.0):
    return (f"{iteration},{objective!r},{se!r},{ee!r},{tau!r},{residual!r},"
            f"{inner_f},{inner_phi},{wall!r}")


def write_trace(path, lines):
    path.write_text(TRACE_HEADER + "\n" + "\n".join(lines) + "\n")
    return path
