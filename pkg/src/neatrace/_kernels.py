"""JIT-compiled numeric core.

Every float operation that both the step-by-step API and the fused episode
loop perform lives here, once. The public modules (physics, track, sensors,
evaluation) wrap these kernels, so composing the fine-grained operations
frame by frame produces bit-identical results to running a whole episode
through ``episode_kernel``.

All angles are degrees, counterclockwise, 0 along +x, world y points up.
Distances are world units. ``NO_HIT`` marks a ray/sweep that met nothing.
"""

import numpy as np
from numba import njit

DEG2RAD = np.pi / 180.0
RAD2DEG = 180.0 / np.pi
NO_HIT = 1e30

# Episode termination codes (mirrored by evaluation.Termination).
TERM_FINISHED = 0
TERM_COLLISION = 1
TERM_STALLED = 2
TERM_TIME_LIMIT = 3

# Heading offsets of the eight fixed wall-distance rays, in sensor order.
RAY_OFFSETS = np.array([0.0, 180.0, -15.0, 15.0, -30.0, 30.0, -90.0, 90.0])

N_SENSORS = 23


@njit(cache=True)
def norm_heading(h):
    """Wrap a heading into [0, 360)."""
    return h % 360.0


@njit(cache=True)
def signed_delta(a, b):
    """Smallest signed angle a - b, in (-180, 180]."""
    d = (a - b) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


@njit(cache=True)
def clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


# ---------------------------------------------------------------------------
# physics
# ---------------------------------------------------------------------------

@njit(cache=True)
def integrate_kernel(x, y, vx, vy, heading, turn, thrust,
                     dt, max_thrust, max_turn, friction, gx, gy):
    """One semi-implicit Euler step: turn, thrust, gravity, friction, move.

    Returns (x', y', vx', vy', heading'). Commands are clamped here so the
    kernel is safe against out-of-range network output.
    """
    turn = clamp(turn, -1.0, 1.0)
    thrust = clamp(thrust, 0.0, 1.0)
    h = (heading + turn * max_turn * dt) % 360.0
    hr = h * DEG2RAD
    a = thrust * max_thrust
    ax = a * np.cos(hr) + gx
    ay = a * np.sin(hr) + gy
    decay = 1.0 - friction * dt
    nvx = (vx + ax * dt) * decay
    nvy = (vy + ay * dt) * decay
    return x + nvx * dt, y + nvy * dt, nvx, nvy, h


# ---------------------------------------------------------------------------
# segment geometry
# ---------------------------------------------------------------------------

@njit(cache=True)
def sweep_kernel(x0, y0, x1, y1, wall_a, wall_e):
    """Earliest intersection of the motion segment with any wall.

    Returns (t, wall_index) with t in [0, 1], or (NO_HIT, -1). Ties on t
    resolve to the lowest wall index (walls are stored in id order).
    """
    dx = x1 - x0
    dy = y1 - y0
    best_t = NO_HIT
    best_i = -1
    if dx == 0.0 and dy == 0.0:
        # Zero-length sweep: hit only if the point lies on a wall.
        for i in range(wall_a.shape[0]):
            ax = wall_a[i, 0]
            ay = wall_a[i, 1]
            ex = wall_e[i, 0]
            ey = wall_e[i, 1]
            if (x0 - ax) * ey - (y0 - ay) * ex == 0.0:
                dot = (x0 - ax) * ex + (y0 - ay) * ey
                l2 = ex * ex + ey * ey
                if l2 > 0.0 and 0.0 <= dot <= l2:
                    return 0.0, i
        return NO_HIT, -1
    for i in range(wall_a.shape[0]):
        ax = wall_a[i, 0]
        ay = wall_a[i, 1]
        ex = wall_e[i, 0]
        ey = wall_e[i, 1]
        den = dx * ey - dy * ex
        rx = ax - x0
        ry = ay - y0
        if den != 0.0:
            t = (rx * ey - ry * ex) / den
            s = (rx * dy - ry * dx) / den
            if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0 and t < best_t:
                best_t = t
                best_i = i
        elif rx * dy - ry * dx == 0.0:
            # Collinear overlap: earliest overlapping parameter.
            l2 = dx * dx + dy * dy
            ta = (rx * dx + ry * dy) / l2
            tb = ((ax + ex - x0) * dx + (ay + ey - y0) * dy) / l2
            lo = min(ta, tb)
            hi = max(ta, tb)
            if hi >= 0.0 and lo <= 1.0:
                t = max(lo, 0.0)
                if t < best_t:
                    best_t = t
                    best_i = i
    return best_t, best_i


@njit(cache=True)
def ray_kernel(ox, oy, dx, dy, wall_a, wall_e):
    """Distance along unit direction (dx, dy) to the nearest wall, else NO_HIT."""
    best = NO_HIT
    for i in range(wall_a.shape[0]):
        ax = wall_a[i, 0]
        ay = wall_a[i, 1]
        ex = wall_e[i, 0]
        ey = wall_e[i, 1]
        den = dx * ey - dy * ex
        rx = ax - ox
        ry = ay - oy
        if den != 0.0:
            t = (rx * ey - ry * ex) / den
            s = (rx * dy - ry * dx) / den
            if t >= 0.0 and 0.0 <= s <= 1.0 and t < best:
                best = t
        elif rx * dy - ry * dx == 0.0:
            # Ray collinear with the wall: nearest endpoint ahead.
            ta = rx * dx + ry * dy
            tb = (ax + ex - ox) * dx + (ay + ey - oy) * dy
            lo = min(ta, tb)
            hi = max(ta, tb)
            if hi >= 0.0:
                t = max(lo, 0.0)
                if t < best:
                    best = t
    return best


@njit(cache=True)
def ray_at_angle(ox, oy, angle_deg, wall_a, wall_e):
    a = angle_deg * DEG2RAD
    return ray_kernel(ox, oy, np.cos(a), np.sin(a), wall_a, wall_e)


@njit(cache=True)
def closest_wall_point_kernel(px, py, wall_a, wall_e):
    """Exact nearest point on any wall. Returns (distance, cx, cy)."""
    best = NO_HIT
    bx = px
    by = py
    for i in range(wall_a.shape[0]):
        ax = wall_a[i, 0]
        ay = wall_a[i, 1]
        ex = wall_e[i, 0]
        ey = wall_e[i, 1]
        l2 = ex * ex + ey * ey
        if l2 == 0.0:
            continue
        t = ((px - ax) * ex + (py - ay) * ey) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = ax + t * ex
        cy = ay + t * ey
        d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy)
        if d2 < best:
            best = d2
            bx = cx
            by = cy
    return np.sqrt(best), bx, by


# ---------------------------------------------------------------------------
# waypoint progress
# ---------------------------------------------------------------------------

@njit(cache=True)
def project_polyline_kernel(px, py, wp):
    """Globally nearest projection onto the closed waypoint loop.

    Returns (segment_index, param) with param in [0, 1]; ties keep the
    lowest segment index.
    """
    n = wp.shape[0]
    best_d2 = NO_HIT
    best_i = 0
    best_t = 0.0
    for i in range(n):
        ax = wp[i, 0]
        ay = wp[i, 1]
        j = i + 1
        if j == n:
            j = 0
        ex = wp[j, 0] - ax
        ey = wp[j, 1] - ay
        l2 = ex * ex + ey * ey
        if l2 == 0.0:
            continue
        t = ((px - ax) * ex + (py - ay) * ey) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = ax + t * ex
        cy = ay + t * ey
        d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy)
        if d2 < best_d2:
            best_d2 = d2
            best_i = i
            best_t = t
    return best_i, best_t


@njit(cache=True)
def progress_kernel(px, py, wp, seg_len, total_len,
                    origin_idx, origin_t, segs_passed, best, frames_since):
    """Advance loop progress for one frame at position (px, py).

    A waypoint is passed when the projection parameter exits its segment at
    the far end; the candidate arc then continues on the next segment. The
    lap is complete (100.0) once the traversed arc reaches the full loop
    length, i.e. the projection returns to the episode's starting arc point.

    Returns (segs_passed', best', frames_since').
    """
    n = wp.shape[0]
    k = segs_passed
    t = 0.0
    while True:
        cur = (origin_idx + k) % n
        nxt = cur + 1
        if nxt == n:
            nxt = 0
        ax = wp[cur, 0]
        ay = wp[cur, 1]
        ex = wp[nxt, 0] - ax
        ey = wp[nxt, 1] - ay
        t = ((px - ax) * ex + (py - ay) * ey) / (ex * ex + ey * ey)
        if t < 0.0:
            t = 0.0
        if t >= 1.0:
            if k < n:
                k += 1
                continue
            t = 1.0
        break
    if k == 0:
        rel = (t - origin_t) * seg_len[origin_idx]
        if rel < 0.0:
            rel = 0.0
    else:
        rel = (1.0 - origin_t) * seg_len[origin_idx]
        for j in range(1, k):
            rel += seg_len[(origin_idx + j) % n]
        rel += t * seg_len[(origin_idx + k) % n]
    pct = 100.0 * rel / total_len
    if pct > 100.0:
        pct = 100.0
    if pct > best:
        best = pct
        frames_since = 0
    else:
        frames_since += 1
    return k, best, frames_since


@njit(cache=True)
def track_direction_kernel(wp, last_idx):
    """Heading of the loop segment that starts at waypoint last_idx."""
    n = wp.shape[0]
    j = last_idx + 1
    if j == n:
        j = 0
    return np.arctan2(wp[j, 1] - wp[last_idx, 1], wp[j, 0] - wp[last_idx, 0]) * RAD2DEG % 360.0


# ---------------------------------------------------------------------------
# time-to-event helpers
# ---------------------------------------------------------------------------

@njit(cache=True)
def tt_frames_kernel(dist, v_along, fps, max_tt):
    """Frames until wall contact at constant closing speed, clamped to max_tt."""
    if v_along <= 0.0:
        return max_tt
    f = dist / v_along * fps
    if f > max_tt:
        return max_tt
    if f < 0.0:
        return 0.0
    return f


@njit(cache=True)
def retro_frames_kernel(dist, v_along, accel, fps, max_tt):
    """Frames left until full reverse thrust can no longer stop before the wall.

    With stopping distance s = v^2 / (2a): max_tt when not approaching,
    0 once dist <= s, else fps * (dist - s) / v, clamped to max_tt.
    """
    if v_along <= 0.0:
        return max_tt
    s = v_along * v_along / (2.0 * accel)
    if dist <= s:
        return 0.0
    f = (dist - s) / v_along * fps
    if f > max_tt:
        return max_tt
    return f


# ---------------------------------------------------------------------------
# sensors
# ---------------------------------------------------------------------------

@njit(cache=True)
def sense_kernel(x, y, vx, vy, heading, last_turn, last_thrust,
                 wall_a, wall_e, wp, last_idx,
                 max_range, max_tt, retro_accel, fan_offsets, closest_exact,
                 fps, speed_norm, out):
    """Fill the 23-entry controller input vector (see sensors.SensorVector)."""
    speed = np.sqrt(vx * vx + vy * vy)
    out[0] = clamp(speed / speed_norm, 0.0, 1.0)

    track_dir = track_direction_kernel(wp, last_idx)
    tr = track_dir * DEG2RAD
    ux = np.cos(tr)
    uy = np.sin(tr)
    d_track = ray_kernel(x, y, ux, uy, wall_a, wall_e)
    out[1] = clamp(d_track / max_range, 0.0, 1.0)
    out[2] = signed_delta(track_dir, heading) / 180.0

    if closest_exact:
        dist, cx, cy = closest_wall_point_kernel(x, y, wall_a, wall_e)
        if cx == x and cy == y:
            ang = heading
        else:
            ang = np.arctan2(cy - y, cx - x) * RAD2DEG % 360.0
    else:
        dist = NO_HIT
        ang = heading
        for i in range(fan_offsets.shape[0]):
            d = ray_at_angle(x, y, heading + fan_offsets[i], wall_a, wall_e)
            if d < dist:
                dist = d
                ang = heading + fan_offsets[i]
    out[3] = clamp(dist / max_range, 0.0, 1.0)
    out[4] = signed_delta(ang, heading) / 180.0

    for i in range(8):
        d = ray_at_angle(x, y, heading + RAY_OFFSETS[i], wall_a, wall_e)
        out[5 + i] = clamp(d / max_range, 0.0, 1.0)

    v_along = vx * ux + vy * uy
    out[13] = tt_frames_kernel(d_track, v_along, fps, max_tt) / max_tt
    out[14] = retro_frames_kernel(d_track, v_along, retro_accel, fps, max_tt) / max_tt

    out[15] = clamp(last_thrust, 0.0, 1.0)
    out[16] = clamp(last_turn, -1.0, 1.0)

    n = wp.shape[0]
    for j in range(3):
        w = (last_idx + 1 + j) % n
        wx = wp[w, 0] - x
        wy = wp[w, 1] - y
        if wx == 0.0 and wy == 0.0:
            out[17 + 2 * j] = 0.0
            out[18 + 2 * j] = 0.0
        else:
            a = np.arctan2(wy, wx) * RAD2DEG % 360.0
            out[17 + 2 * j] = signed_delta(a, heading) / 180.0
            out[18 + 2 * j] = clamp(np.sqrt(wx * wx + wy * wy) / max_range, 0.0, 1.0)


# ---------------------------------------------------------------------------
# network evaluation
# ---------------------------------------------------------------------------

@njit(cache=True)
def activate_kernel(values, order, in_ptr, in_src, in_w, act_code):
    """Evaluate a feed-forward net over value slots, in topological order.

    act_code: 0 identity, 1 steepened sigmoid, 2 tanh, 3 logistic.
    """
    for oi in range(order.shape[0]):
        acc = 0.0
        for e in range(in_ptr[oi], in_ptr[oi + 1]):
            acc += in_w[e] * values[in_src[e]]
        c = act_code[oi]
        if c == 1:
            v = 1.0 / (1.0 + np.exp(-4.9 * acc))
        elif c == 2:
            v = np.tanh(acc)
        elif c == 3:
            v = 1.0 / (1.0 + np.exp(-acc))
        else:
            v = acc
        values[order[oi]] = v


# ---------------------------------------------------------------------------
# fused episode loop
# ---------------------------------------------------------------------------

@njit(cache=True)
def frame_bonus_kernel(speed, threshold, divisor, exponent):
    if speed <= threshold:
        return 0.0
    b = speed ** exponent / divisor
    if b > 1.0:
        return 1.0
    return b


@njit(cache=True)
def episode_kernel(sx, sy, sheading,
                   order, in_ptr, in_src, in_w, act_code,
                   n_slots, turn_slot, thrust_slot,
                   wall_a, wall_e, wp, seg_len, total_len,
                   max_range, max_tt, retro_accel, fan_offsets, closest_exact,
                   dt, fps, max_thrust, max_turn, friction, gx, gy, speed_norm,
                   stall_window, bonus_threshold, bonus_divisor, bonus_exponent,
                   max_frames, trace, record_trace):
    """Run one full episode. Calls the same kernels as the public operations.

    Returns (term_code, frames, completion, bonus, x, y, vx, vy, heading,
    segs_passed, origin_idx, origin_t, n_trace_rows).
    """
    origin_idx, origin_t = project_polyline_kernel(sx, sy, wp)
    x = sx
    y = sy
    vx = 0.0
    vy = 0.0
    heading = sheading % 360.0
    segs = 0
    best = 0.0
    since = 0
    last_turn = 0.0
    last_thrust = 0.0
    bonus = 0.0
    term = TERM_TIME_LIMIT
    frames = 0
    n_trace = 0
    sensors = np.zeros(N_SENSORS)
    values = np.zeros(n_slots)

    for frame in range(1, max_frames + 1):
        last_idx = (origin_idx + segs) % wp.shape[0]
        sense_kernel(x, y, vx, vy, heading, last_turn, last_thrust,
                     wall_a, wall_e, wp, last_idx,
                     max_range, max_tt, retro_accel, fan_offsets, closest_exact,
                     fps, speed_norm, sensors)
        for i in range(N_SENSORS):
            values[i] = sensors[i]
        values[N_SENSORS] = 1.0  # bias slot
        for i in range(N_SENSORS + 1, n_slots):
            values[i] = 0.0
        activate_kernel(values, order, in_ptr, in_src, in_w, act_code)
        turn = values[turn_slot]
        thrust = values[thrust_slot]
        frames = frame
        if not (np.isfinite(turn) and np.isfinite(thrust)):
            # Broken controller output counts as a fatal failure.
            term = TERM_COLLISION
            break

        nx, ny, nvx, nvy, nh = integrate_kernel(
            x, y, vx, vy, heading, turn, thrust,
            dt, max_thrust, max_turn, friction, gx, gy)
        t_hit, hit_i = sweep_kernel(x, y, nx, ny, wall_a, wall_e)
        collided = hit_i >= 0
        if collided:
            nx = x + (nx - x) * t_hit
            ny = y + (ny - y) * t_hit
        x = nx
        y = ny
        vx = nvx
        vy = nvy
        heading = nh

        segs, best, since = progress_kernel(
            x, y, wp, seg_len, total_len, origin_idx, origin_t, segs, best, since)

        speed = np.sqrt(vx * vx + vy * vy)
        if not collided and since == 0:
            bonus += frame_bonus_kernel(speed, bonus_threshold, bonus_divisor,
                                        bonus_exponent)
        last_turn = clamp(turn, -1.0, 1.0)
        last_thrust = clamp(thrust, 0.0, 1.0)

        if record_trace:
            trace[n_trace, 0] = frame
            trace[n_trace, 1] = x
            trace[n_trace, 2] = y
            trace[n_trace, 3] = heading
            trace[n_trace, 4] = speed
            trace[n_trace, 5] = last_turn
            trace[n_trace, 6] = last_thrust
            trace[n_trace, 7] = best
            n_trace += 1

        if best >= 100.0:
            term = TERM_FINISHED
            break
        if collided:
            term = TERM_COLLISION
            break
        if since * dt >= stall_window:
            term = TERM_STALLED
            break

    return (term, frames, best, bonus, x, y, vx, vy, heading,
            segs, origin_idx, origin_t, n_trace)
