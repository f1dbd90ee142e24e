import pytest

from lfr_stream.errors import ValidationError
from lfr_stream.settings import parse_size

# parse_size tests


@pytest.mark.parametrize(
    "text,expected",
    [
        ("4096", 4096),
        ("12B", 12),
        ("512KiB", 512 << 10),
        ("256MiB", 256 << 20),
        ("2g", 2 << 30),
        (" 3 MB ", 3 << 20),
    ],
)
def test_parse_size(text, expected):
    """Should accept plain byte counts and binary suffixes."""
    assert parse_size(text) == expected


@pytest.mark.parametrize("text", ["", "MiB", "-1", "1.5GiB", "10TiB"])
def test_parse_size_rejects_garbage(text):
    """Should reject sizes it cannot parse."""
    with pytest.raises(ValidationError):
        parse_size(text)
