"""
PNG export of execution traces using Pillow
"""

import io
import re
from typing import List, Optional, Tuple

from PIL import Image, ImageDraw, ImageFont

from heardof.config import TRACE_TOKEN_PATTERNS

# Dark palette, one entry per token kind
COLORS = {
    "background": (30, 30, 30),
    "rule": (70, 70, 70),
    "text": (212, 212, 212),
    "deliver": (86, 156, 214),
    "next": (106, 153, 85),
    "stop": (209, 109, 158),
    "header": (206, 145, 120),
    "round": (220, 220, 170),
    "process": (156, 220, 254),
}

MONOSPACE_FONTS = (
    "/System/Library/Fonts/Monaco.ttf",
    "/usr/share/fonts/truetype/dejavu/DejaVuSansMono.ttf",
    "/usr/share/fonts/TTF/DejaVuSansMono.ttf",
    "C:\\Windows\\Fonts\\consola.ttf",
)

TOKEN = re.compile(r"\s*\S+")


def load_font(size: int) -> ImageFont.ImageFont:
    for path in MONOSPACE_FONTS:
        try:
            return ImageFont.truetype(path, size)
        except OSError:
            continue
    return ImageFont.load_default()


def line_kind(line: str) -> str:
    stripped = line.strip()
    if stripped.startswith("#"):
        return "header"
    for pattern, key in TRACE_TOKEN_PATTERNS:
        if re.fullmatch(pattern, stripped):
            return key
    return "text"


def tokenize_with_colors(line: str) -> List[Tuple[str, str]]:
    """
    Split a trace line into (text, color_key) pieces.

    Event letters take the event colour, round numbers and process names get
    their own. Headers and unrecognised lines stay in one piece.
    """
    kind = line_kind(line)
    if kind in ("header", "text", "stop"):
        return [(line, kind)]
    pieces = TOKEN.findall(line)
    colored = [(pieces[0], kind)]
    for piece in pieces[1:]:
        colored.append((piece, "round" if piece.strip().isdigit() else "process"))
    return colored


def delivery_round(line: str) -> Optional[int]:
    if line_kind(line) != "deliver":
        return None
    return int(line.split()[1])


def render_trace_to_image(
    text: str,
    font_size: int = 24,
    padding: int = 32,
    line_height: float = 1.4,
    columns: int = 1,
) -> bytes:
    """
    Render trace text to PNG bytes.

    Long traces are split into `columns` columns. A faint rule is drawn above
    the first delivery of each new round.
    """
    if columns < 1:
        raise ValueError(f"columns must be positive, got {columns}")
    font = load_font(font_size)
    char_width = font.getlength("M")
    step = int(font_size * line_height)

    lines = text.rstrip("\n").split("\n") if text.strip() else [""]
    per_column = -(-len(lines) // columns)
    column_width = int((max(len(line) for line in lines) + 4) * char_width)

    width = max(column_width * columns + padding * 2, 200)
    height = max(per_column * step + padding * 2, 80)
    img = Image.new("RGB", (width, height), COLORS["background"])
    draw = ImageDraw.Draw(img)

    current_round = None
    for index, line in enumerate(lines):
        column, row = divmod(index, per_column)
        left = padding + column * column_width
        top = padding + row * step
        r = delivery_round(line)
        if r is not None and current_round is not None and r != current_round and row > 0:
            draw.line((left, top - 2, left + column_width - char_width, top - 2), fill=COLORS["rule"])
        if r is not None:
            current_round = r
        x = left
        for piece, key in tokenize_with_colors(line):
            draw.text((x, top), piece, font=font, fill=COLORS.get(key, COLORS["text"]))
            x += font.getlength(piece)

    buffer = io.BytesIO()
    img.save(buffer, format="PNG", optimize=True)
    return buffer.getvalue()
