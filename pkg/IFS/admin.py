from django.contrib import admin
from .models import ProblemRecord, RunRecord


@admin.register(ProblemRecord)
class ProblemRecordAdmin(admin.ModelAdmin):
    list_display = ('id', 'name', 'dimension', 'created_at')
    search_fields = ('name',)
    date_hierarchy = 'created_at'

    def dimension(self, obj):
        return obj.problem.get('dimension')


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    list_display = ('id', 'subcommand', 'verdict', 'problem', 'seed', 'created_at')
    list_filter = ('subcommand', 'verdict', 'created_at')
    search_fields = ('problem__name',)
    date_hierarchy = 'created_at'
