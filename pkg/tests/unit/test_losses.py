import pytest
import torch

from mcenet.model import LatentParams, elbo_loss, elbo_terms, kl_divergence, reparameterize


def _params(mu, log_var) -> LatentParams:
    return LatentParams(mu=torch.tensor(mu, dtype=torch.float64), log_var=torch.tensor(log_var, dtype=torch.float64))


# --------------------------------------------------------------------- #
# KL TERM
# --------------------------------------------------------------------- #

def test_kl_of_the_prior_is_zero():
    assert kl_divergence(_params([0.0] * 16, [0.0] * 16)).item() == 0.0


def test_kl_unit_mean_shift():
    assert kl_divergence(_params([1.0], [0.0])).item() == pytest.approx(0.5)


def test_kl_sums_over_latent_dims_only():
    lp = _params([[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]])
    torch.testing.assert_close(kl_divergence(lp), torch.tensor([0.5, 0.0], dtype=torch.float64))


def test_kl_matches_monte_carlo():
    """Closed form agrees with E_q[log q(z) - log p(z)] estimated from 10^6 draws."""
    gen = torch.Generator().manual_seed(0)
    prior = torch.distributions.Normal(0.0, 1.0)
    for _ in range(20):
        mu = torch.randn(4, generator=gen, dtype=torch.float64)
        log_var = 0.5 * torch.randn(4, generator=gen, dtype=torch.float64)
        lp = LatentParams(mu=mu, log_var=log_var)
        q = torch.distributions.Normal(mu, lp.sigma)

        z = reparameterize(LatentParams(mu=mu.expand(10**6, 4), log_var=log_var.expand(10**6, 4)), generator=gen)
        estimate = (q.log_prob(z) - prior.log_prob(z)).sum(dim=-1).mean().item()
        exact = kl_divergence(lp).item()
        assert abs(estimate - exact) <= max(0.02 * exact, 0.01)


# --------------------------------------------------------------------- #
# REPARAMETERISATION
# --------------------------------------------------------------------- #

def test_zero_noise_returns_the_mean():
    lp = _params([0.3, -1.2], [0.7, -2.0])
    torch.testing.assert_close(reparameterize(lp, torch.zeros(2, dtype=torch.float64)), lp.mu)


def test_standard_params_pass_noise_through():
    eps = torch.tensor([0.5, -0.25, 2.0], dtype=torch.float64)
    torch.testing.assert_close(reparameterize(_params([0.0] * 3, [0.0] * 3), eps), eps)


def test_reparameterize_is_affine_in_noise():
    lp = _params([1.0, 2.0], [0.4, -0.6])
    eps = torch.tensor([0.3, -1.1], dtype=torch.float64)
    torch.testing.assert_close(reparameterize(lp, eps), lp.mu + torch.exp(0.5 * lp.log_var) * eps)

    e1, e2 = eps, torch.tensor([-0.4, 2.5], dtype=torch.float64)
    zero = torch.zeros(2, dtype=torch.float64)
    torch.testing.assert_close(
        reparameterize(lp, e1) + reparameterize(lp, e2) - reparameterize(lp, zero), reparameterize(lp, e1 + e2)
    )


def test_sampled_latents_have_the_right_moments():
    lp = LatentParams(
        mu=torch.full((10**5, 1), 2.0, dtype=torch.float64),
        log_var=torch.full((10**5, 1), float(torch.log(torch.tensor(0.25))), dtype=torch.float64),
    )
    z = reparameterize(lp, generator=torch.Generator().manual_seed(3))
    assert z.mean().item() == pytest.approx(2.0, abs=0.01)
    assert z.std().item() == pytest.approx(0.5, abs=0.01)


# --------------------------------------------------------------------- #
# ELBO
# --------------------------------------------------------------------- #

def test_elbo_is_mse_plus_weighted_kl():
    gen = torch.Generator().manual_seed(1)
    pred = torch.randn(4, 8, 2, generator=gen)
    true = torch.randn(4, 8, 2, generator=gen)
    lp = LatentParams(mu=torch.randn(4, 16, generator=gen), log_var=torch.randn(4, 16, generator=gen))

    terms = elbo_terms(pred, true, lp, kl_weight=0.3)
    torch.testing.assert_close(terms.mse, ((pred - true) ** 2).mean())
    torch.testing.assert_close(terms.total, terms.mse + 0.3 * terms.kl)
    torch.testing.assert_close(elbo_loss(pred, true, lp, kl_weight=0.0), terms.mse)


def test_perfect_reconstruction_at_the_prior_costs_nothing():
    target = torch.ones(2, 8, 2)
    lp = LatentParams(mu=torch.zeros(2, 16), log_var=torch.zeros(2, 16))
    assert elbo_loss(target, target.clone(), lp, kl_weight=1.0).item() == 0.0


def test_elbo_shape_mismatch():
    lp = LatentParams(mu=torch.zeros(1, 2), log_var=torch.zeros(1, 2))
    with pytest.raises(ValueError):
        elbo_loss(torch.zeros(1, 8, 2), torch.zeros(1, 7, 2), lp, 1.0)


def test_loss_gradients_match_finite_differences():
    gen = torch.Generator().manual_seed(2)
    pred = torch.randn(2, 3, 2, generator=gen, dtype=torch.float64, requires_grad=True)
    true = torch.randn(2, 3, 2, generator=gen, dtype=torch.float64)
    mu = torch.randn(2, 4, generator=gen, dtype=torch.float64, requires_grad=True)
    log_var = torch.randn(2, 4, generator=gen, dtype=torch.float64, requires_grad=True)

    def loss(p, m, v):
        return elbo_loss(p, true, LatentParams(mu=m, log_var=v), kl_weight=0.7)

    assert torch.autograd.gradcheck(loss, (pred, mu, log_var))
