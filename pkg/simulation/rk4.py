def rk4_step(fun, t, state, dt):
    '''
    One classical fourth order Runge-Kutta step of d state / dt = fun(t, state).
    '''
    k1 = fun(t, state)
    k2 = fun(t + 0.5 * dt, state + 0.5 * dt * k1)
    k3 = fun(t + 0.5 * dt, state + 0.5 * dt * k2)
    k4 = fun(t + dt, state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
