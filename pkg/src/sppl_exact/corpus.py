"""Reference programs used by the tests, the acceptance suite and the CLI docs."""

INDIAN_GPA = """\
Nationality ~ choice({'India': 0.5, 'USA': 0.5})
if (Nationality == 'India'):
    Perfect ~ bernoulli(p=0.10)
    if Perfect:         GPA ~ atom(10)
    else:               GPA ~ uniform(0, 10)
else: # Nationality is 'USA'
    Perfect ~ bernoulli(p=0.15)
    if Perfect:         GPA ~ atom(4)
    else:               GPA ~ uniform(0, 4)
"""

INDIAN_GPA_EVENT = "((Nationality == 'USA') and (GPA > 3)) or (8 < GPA < 10)"

# The inner switch on Z[t] sits inside the switch on Z[t-1], at the same depth
# as the sample of Z[t], so that X[t] and Y[t] are defined on every branch.
HMM_TEMPLATE = """\
p_transition = [.2, .8]
mu_x = [[5, 7], [5, 15]]
mu_y = [[5, 8], [3, 8]]

n_step = {n_step}
Z = array(n_step)
X = array(n_step)
Y = array(n_step)

separated ~ bernoulli(p=.4)
switch separated cases (s in [0,1]):
  Z[0] ~ bernoulli(p=.5)
  switch Z[0] cases (z in [0, 1]):
    X[0] ~ normal(mu_x[s][z], 1)
    Y[0] ~ poisson(mu_y[s][z])
  for t in range(1, n_step):
    switch Z[t-1] cases (z in [0, 1]):
      Z[t] ~ bernoulli(p_transition[z])
      switch Z[t] cases (z in [0, 1]):
        X[t] ~ normal(mu_x[s][z], 1)
        Y[t] ~ poisson(mu_y[s][z])
"""


def hmm(n_step: int) -> str:
    return HMM_TEMPLATE.format(n_step=int(n_step))


POLY_INVERT = """\
X ~ normal(0, 2)
if X < 1:
 Z ~ -X**3 + X**2 + 6*X
else:
 Z ~ 5*sqrt(X) + 11
"""

# Variant whose right branch reaches the conditioning region [0, 2].
POLY_INVERT_SHIFTED = """\
X ~ normal(0, 2)
if X < 1:
 Z ~ -X**3 + X**2 + 6*X
else:
 Z ~ 5*sqrt(X) - 9
"""

POLY_INVERT_EVENT = """\
condition
  Z**2 <= 4
  and Z >= 0
"""

# Discrete hidden states with continuous observations, for measure-zero
# conditioning on the observed values.
HMM_CONTINUOUS_TEMPLATE = """\
p_transition = [.3, .8]
mu = [-1.0, 2.0]
n_step = {n_step}
Z = array(n_step)
X = array(n_step)
Z[0] ~ bernoulli(p=.4)
switch Z[0] cases (z in [0, 1]):
    X[0] ~ normal(mu[z], 1.5)
for t in range(1, n_step):
    switch Z[t-1] cases (z in [0, 1]):
        Z[t] ~ bernoulli(p=p_transition[z])
    switch Z[t] cases (z in [0, 1]):
        X[t] ~ normal(mu[z], 1.5)
"""


def hmm_continuous(n_step: int) -> str:
    return HMM_CONTINUOUS_TEMPLATE.format(n_step=int(n_step))


MIXED = """\
K ~ poisson(3)
if K <= 2:
    W ~ gamma(2, 1.5)
    C ~ choice({'low': 0.7, 'mid': 0.3})
elif K <= 5:
    W ~ beta(2, 5)
    C ~ choice({'mid': 0.5, 'high': 0.5})
else:
    W ~ uniform(-1, 1)
    C ~ atom('high')
V = W**2 + 1
B ~ binomial(4, 0.3)
"""

PROGRAMS = {
    "indian_gpa": INDIAN_GPA,
    "hmm4": hmm(4),
    "poly_invert": POLY_INVERT,
    "poly_invert_shifted": POLY_INVERT_SHIFTED,
    "mixed": MIXED,
}
