from django.db import models


class ProblemRecord(models.Model):
    """A validated problem file, stored in canonical form."""
    name = models.CharField(max_length=200)
    problem = models.JSONField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return self.name


class RunRecord(models.Model):
    """The RunReport of one command run, optionally tied to a stored problem."""
    VERDICT_CHOICES = [
        ('PASS', 'Pass'),
        ('FAIL', 'Fail'),
        ('SPECTRAL-EVIDENCE', 'Spectral evidence'),
    ]

    problem = models.ForeignKey(ProblemRecord, on_delete=models.CASCADE, related_name='runs', null=True, blank=True)
    subcommand = models.CharField(max_length=50)
    verdict = models.CharField(max_length=20, choices=VERDICT_CHOICES)
    report = models.JSONField()
    seed = models.BigIntegerField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.subcommand}: {self.get_verdict_display()}"

    @classmethod
    def from_report(cls, report, problem: 'ProblemRecord' = None) -> 'RunRecord':
        """Stores a RunReport (IFS.report_service.RunReport)."""
        return cls.objects.create(
            problem=problem,
            subcommand=report.subcommand,
            verdict=report.verdict,
            report=report.to_record_payload(),
            seed=report.seed,
        )
