"""
PDF Run Report Generator
Single-page summary of a run: configuration, energies, constraint errors,
termination and the step-size advisory checks
"""

import os
from datetime import datetime
from typing import Dict, List, Optional

from reportlab.lib import colors
from reportlab.lib.enums import TA_LEFT
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from . import __version__
from .models.diagnostics import AdvisoryReport


class RunReportPDFGenerator:
    """Builds the run summary PDF with reportlab platypus"""

    PRIMARY = colors.HexColor('#23395B')
    PASS = colors.HexColor('#2E7D32')
    FAIL = colors.HexColor('#C62828')
    MUTED = colors.HexColor('#757575')

    def __init__(self, summary: Dict, config: Dict, advisory: Optional[AdvisoryReport] = None,
                 derived: Optional[Dict] = None):
        self.summary = summary
        self.config = config
        self.advisory = advisory
        self.derived = derived or {}
        self.created = datetime.now().strftime("%Y-%m-%d %H:%M")

    def generate(self, output_path: str) -> str:
        dir_path = os.path.dirname(output_path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)

        doc = SimpleDocTemplate(
            output_path,
            pagesize=A4,
            rightMargin=0.6 * inch,
            leftMargin=0.6 * inch,
            topMargin=0.5 * inch,
            bottomMargin=0.5 * inch,
            title=f"afmflow run {self.summary.get('name', '')}",
        )
        story = []
        story.extend(self._build_header())
        story.extend(self._build_metadata())
        story.extend(self._build_energy_table())
        story.extend(self._build_constraint_table())
        if self.advisory is not None:
            story.extend(self._build_advisory_table())
        doc.build(story)
        return output_path

    def _section_title(self, text: str) -> Paragraph:
        styles = getSampleStyleSheet()
        style = ParagraphStyle('SectionTitle', parent=styles['Normal'], fontSize=11,
                               spaceBefore=8, spaceAfter=5, alignment=TA_LEFT,
                               fontName='Helvetica-Bold')
        return Paragraph(text, style)

    def _grid(self, data: List[List[str]], widths: List[float]) -> Table:
        table = Table(data, colWidths=[w * inch for w in widths])
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), self.PRIMARY),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTNAME', (0, 1), (-1, -1), 'Helvetica'),
            ('FONTSIZE', (0, 0), (-1, -1), 8),
            ('ALIGN', (1, 1), (-1, -1), 'RIGHT'),
            ('GRID', (0, 0), (-1, -1), 0.25, colors.grey),
            ('TOPPADDING', (0, 0), (-1, -1), 3),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 3),
        ]))
        return table

    def _build_header(self):
        header = Table([[f"afmflow run: {self.summary.get('name', 'run')}", self.created]],
                       colWidths=[5 * inch, 2 * inch])
        header.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, -1), self.PRIMARY),
            ('TEXTCOLOR', (0, 0), (-1, -1), colors.white),
            ('FONTNAME', (0, 0), (-1, -1), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (0, 0), 15),
            ('FONTSIZE', (1, 0), (1, 0), 9),
            ('ALIGN', (1, 0), (1, 0), 'RIGHT'),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
            ('TOPPADDING', (0, 0), (-1, -1), 10),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 10),
        ]))
        return [header, Spacer(1, 0.12 * inch)]

    def _build_metadata(self):
        algorithm = self.config.get("algorithm", {})
        rows = [
            ["Command", str(self.summary.get("command", "-"))],
            ["Preset", str(algorithm.get("preset", "-"))],
            ["Metric", str(algorithm.get("metric") or "-")],
            ["tau / eps", f"{self.derived.get('tau', algorithm.get('tau'))} / {algorithm.get('eps')}"],
            ["Termination", str(self.summary.get("reason", "-"))],
            ["Steps", str(self.summary.get("steps", "-"))],
            ["Seed", str(algorithm.get("seed", "-"))],
            ["Version", __version__],
        ]
        table = Table(rows, colWidths=[1.6 * inch, 5.4 * inch])
        table.setStyle(TableStyle([
            ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
            ('FONTNAME', (1, 0), (1, -1), 'Helvetica'),
            ('FONTSIZE', (0, 0), (-1, -1), 9),
            ('LINEBELOW', (0, 0), (-1, -1), 0.25, colors.lightgrey),
        ]))
        return [self._section_title("Run"), table]

    def _build_energy_table(self):
        initial = self.summary.get("initial_energy", {})
        final = self.summary.get("final_energy", {})
        names = ["intra_exchange", "inter_inhomogeneous", "inter_homogeneous", "anisotropy",
                 "dmi", "zeeman", "total"]
        data = [["Contribution", "Initial", "Final"]]
        for name in names:
            data.append([name.replace("_", " "), f"{initial.get(name, 0.0):.10g}",
                         f"{final.get(name, 0.0):.10g}"])
        elements = [self._section_title("Energy (dimensionless)"), self._grid(data, [2.6, 2.2, 2.2])]
        if "projected_energy" in self.summary:
            elements.append(Spacer(1, 0.05 * inch))
            elements.append(Paragraph(
                f"Energy after nodal projection: {self.summary['projected_energy']:.12g}",
                getSampleStyleSheet()['Normal']))
        return elements

    def _build_constraint_table(self):
        constraint = self.summary.get("constraint", {})
        err_l1 = constraint.get("err_L1", [0.0, 0.0])
        err_linf = constraint.get("err_Linf", [0.0, 0.0])
        data = [["Sublattice", "err L1", "err Linf"],
                ["m1", f"{err_l1[0]:.3e}", f"{err_linf[0]:.3e}"],
                ["m2", f"{err_l1[1]:.3e}", f"{err_linf[1]:.3e}"]]
        return [self._section_title("Unit-length constraint"), self._grid(data, [2.6, 2.2, 2.2])]

    def _build_advisory_table(self):
        data = [["Condition", "Status"]]
        style = []
        for row, check in enumerate(self.advisory.checks, start=1):
            data.append([check.name, check.status])
            color = {"pass": self.PASS, "fail": self.FAIL}.get(check.status, self.MUTED)
            style.append(('TEXTCOLOR', (1, row), (1, row), color))
        table = self._grid(data, [5.6, 1.4])
        table.setStyle(TableStyle(style))
        return [self._section_title("Step-size advisory"), table]


def generate_run_report(summary: Dict, config: Dict, output_dir: str,
                        advisory: Optional[AdvisoryReport] = None,
                        derived: Optional[Dict] = None) -> str:
    """
    Convenience function writing report.pdf into the run directory
    """
    generator = RunReportPDFGenerator(summary, config, advisory, derived)
    return generator.generate(os.path.join(output_dir, "report.pdf"))
