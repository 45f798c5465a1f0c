import pytest
import torch
from torch import nn

from hemotrain import build_model, classifier_head, get_arch, predict_probabilities


def test_unknown_architecture_lists_registry():
    with pytest.raises(ValueError) as exc:
        get_arch("LeNet")
    assert "AlexNet" in str(exc.value)


def test_inception_expects_299():
    assert get_arch("Inception-v3").input_size == 299
    assert get_arch("ResNet-34").input_size == 224


@pytest.mark.parametrize("arch", ["SqueezeNet 1.1", "ResNet-18", "MobileNet-v2"])
def test_head_has_eight_outputs(arch):
    model = build_model(arch, num_classes=8, pretrained=False)
    head = classifier_head(model, arch)
    if isinstance(head, nn.Conv2d):
        assert head.out_channels == 8
    else:
        assert head.out_features == 8
    x = torch.randn(2, 3, 224, 224)
    model.eval()
    with torch.no_grad():
        out = model(x)
    assert out.shape == (2, 8)


def test_all_parameters_trainable():
    model = build_model("SqueezeNet 1.1", pretrained=False)
    assert all(p.requires_grad for p in model.parameters())


def test_softmax_probabilities_sum_to_one():
    model = build_model("SqueezeNet 1.1", pretrained=False)
    probs = predict_probabilities(model, torch.randn(3, 3, 224, 224))
    assert probs.shape == (3, 8)
    assert torch.allclose(probs.sum(dim=1), torch.ones(3), atol=1e-6)
    assert float(probs.min()) >= 0.0


def test_head_gradient_matches_finite_differences():
    """Autograd gradient of the fresh head vs central differences."""
    torch.manual_seed(0)
    model = build_model("SqueezeNet 1.1", pretrained=False).double()
    model.eval()  # freeze dropout so the loss is a deterministic function
    head = classifier_head(model, "SqueezeNet 1.1")
    criterion = nn.CrossEntropyLoss()
    images = torch.randn(2, 3, 224, 224, dtype=torch.float64)
    labels = torch.tensor([1, 6])

    def loss_value():
        with torch.no_grad():
            return float(criterion(model(images), labels).item())

    model.zero_grad()
    loss = criterion(model(images), labels)
    loss.backward()
    grads = head.weight.grad
    assert grads is not None
    assert float(grads.abs().max()) > 0.0

    eps = 1e-6
    flat_grad = grads.flatten()
    strongest = int(flat_grad.abs().argmax())
    probe = [strongest, 0, flat_grad.numel() // 2]
    for idx in probe:
        with torch.no_grad():
            original = float(head.weight.flatten()[idx])
            head.weight.flatten()[idx] = original + eps
            up = loss_value()
            head.weight.flatten()[idx] = original - eps
            down = loss_value()
            head.weight.flatten()[idx] = original
        numeric = (up - down) / (2 * eps)
        analytic = float(flat_grad[idx])
        scale = max(abs(numeric), abs(analytic), 1e-8)
        assert abs(numeric - analytic) / scale < 1e-3, (
            f"index {idx}: autograd {analytic} vs finite difference {numeric}"
        )
